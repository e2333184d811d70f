"""Command line front end.

Subcommands
-----------
kernel            tabulate the closed-form kernel against the Fock trace
friction          the force decomposition and all three friction routes
spectral-density  finite-eta friction density over a detuning grid
dissipation       the three dissipation routes and their deviations
sweep             repeat the scalar diagnostics along one parameter axis
verify            run the full cross-check suite; nonzero exit on failure

Configuration precedence: command line flags override config-file keys,
which override the built-in canonical defaults.  The config file is flat
``key = value`` text with ``#`` comments and keys named exactly like the
flags.  ``--beta inf`` selects zero temperature.

Every table is emitted with a leading ``#`` metadata block echoing the
full configuration, floats carry 17 significant digits, and identical
configurations produce byte-identical output.  Exit codes: 0 success,
1 check or tolerance failure, 2 usage or configuration error.
"""

import argparse
import json
import math
import sys as _sys

import numpy as np

from .dissipation import (
    damped_ramp,
    dissipation_closed_form,
    dissipation_general,
    dissipation_leading_order,
    phi_AA_from_motion,
    reversible_null_check,
)
from .forces import (
    RouteDisagreementError,
    density_grid_integral,
    friction_force_spectral,
    friction_force_time_domain,
    friction_routes,
    friction_spectral_density,
    resonant_prefactor,
)
from .model import (
    ValidationError,
    canonical_system,
)
from .numerics import (
    ConvergenceError,
    QuadratureSpec,
    first_moment_closed_form,
    integrate_semi_infinite_damped,
    lorentzian_squared_norm,
)
from .oracle import phi_trace_grid
from .response import eval_phi, response_kernel

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2

_DEFAULTS = {
    "m1": 1.0,
    "m2": 1.0,
    "omega1": 1.0,
    "omega2": 1.1,
    "hbar": 1.0,
    "beta": 2.0,
    "eta": 0.01,
    "grad-psi": (0.0, 0.0, 1.0),
    "psi0": 0.0,
    "velocity": (0.0, 0.0, 0.1),
    "tail-tol": 1e-12,
    "abs-tol": 1e-8,
    "rel-tol": 1e-7,
    "format": "csv",
    "out": None,
}

_FLOAT_KEYS = ("m1", "m2", "omega1", "omega2", "hbar", "beta", "eta",
               "psi0", "tail-tol", "abs-tol", "rel-tol")
_VECTOR_KEYS = ("grad-psi", "velocity")

_SWEEP_AXES = ("beta", "eta", "omega2", "velocity-magnitude")


class ConfigError(ValueError):
    """Bad key or value in the configuration."""


def _parse_float(text, key):
    text = text.strip()
    if text.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{text}' as a number")


def _parse_vector(text, key):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 3:
        raise ConfigError(f"key '{key}': expected three comma-separated values")
    return tuple(_parse_float(p, key) for p in parts)


def load_config_file(path):
    """Parse the flat key = value config format."""
    settings = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _FLOAT_KEYS:
                settings[key] = _parse_float(value, key)
            elif key in _VECTOR_KEYS:
                settings[key] = _parse_vector(value, key)
            elif key == "format":
                settings[key] = value
            elif key == "out":
                settings[key] = value
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
    return settings


def _add_common_flags(parser):
    for key in _FLOAT_KEYS:
        parser.add_argument(f"--{key}", type=str, default=None, metavar="X")
    parser.add_argument("--grad-psi", type=str, default=None, metavar="X,Y,Z")
    parser.add_argument("--velocity", type=str, default=None, metavar="X,Y,Z")
    parser.add_argument("--config", type=str, default=None, metavar="PATH")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--out", type=str, default=None, metavar="PATH")


def _add_grid_flags(parser):
    parser.add_argument("--axis", choices=_SWEEP_AXES, default=None)
    parser.add_argument("--from", dest="from_", type=str, default=None, metavar="F")
    parser.add_argument("--to", type=str, default=None, metavar="T")
    parser.add_argument("--points", type=int, default=None, metavar="N")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oscfriction",
        description="friction forces and dissipation for two moving "
        "coupled oscillators, with built-in cross checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("kernel", "friction", "spectral-density", "dissipation",
                 "sweep", "verify"):
        p = sub.add_parser(name)
        _add_common_flags(p)
        _add_grid_flags(p)
    return parser


def resolve_settings(args):
    """defaults < config file < explicit command line flags."""
    settings = dict(_DEFAULTS)
    if args.config is not None:
        settings.update(load_config_file(args.config))
    for key in _FLOAT_KEYS:
        flag = getattr(args, key.replace("-", "_"))
        if flag is not None:
            settings[key] = _parse_float(flag, key)
    for key in _VECTOR_KEYS:
        flag = getattr(args, key.replace("-", "_"))
        if flag is not None:
            settings[key] = _parse_vector(flag, key)
    if args.format is not None:
        settings["format"] = args.format
    if args.out is not None:
        settings["out"] = args.out
    if settings["format"] not in ("csv", "json"):
        raise ConfigError(f"key 'format': unknown format '{settings['format']}'")
    return settings


def system_from_settings(settings):
    return canonical_system(
        m1=settings["m1"],
        m2=settings["m2"],
        omega1=settings["omega1"],
        omega2=settings["omega2"],
        hbar=settings["hbar"],
        beta=settings["beta"],
        eta=settings["eta"],
        grad_psi=settings["grad-psi"],
        psi0=settings["psi0"],
        velocity=settings["velocity"],
    )


def quadrature_spec(settings):
    return QuadratureSpec(
        abs_tol=settings["abs-tol"], rel_tol=settings["rel-tol"]
    )


def _fmt(value):
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _config_items(settings, command):
    items = [("command", command)]
    for key in _FLOAT_KEYS:
        items.append((key, _fmt(settings[key])))
    for key in _VECTOR_KEYS:
        items.append((key, ",".join(_fmt(v) for v in settings[key])))
    items.append(("format", settings["format"]))
    return items


def emit(settings, command, header, rows, checks=None, extra_meta=None):
    """Serialize one table as CSV or JSON to --out or stdout."""
    checks = checks or []
    extra_meta = extra_meta or []
    config_items = _config_items(settings, command)
    if settings["format"] == "csv":
        lines = [f"# {key} = {value}" for key, value in config_items]
        lines += [f"# {key} = {value}" for key, value in extra_meta]
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(_fmt(cell) for cell in row))
        for check in checks:
            lines.append(
                ",".join(
                    _fmt(check[field])
                    for field in ("name", "status", "measured", "tolerance")
                )
            )
        text = "\n".join(lines) + "\n"
    else:
        doc = {
            "config": dict(config_items),
            "results": {
                "columns": list(header),
                "rows": [[_json_cell(cell) for cell in row] for row in rows],
                "meta": dict(extra_meta),
            },
            "checks": checks,
        }
        text = json.dumps(doc, indent=2) + "\n"
    if settings["out"]:
        with open(settings["out"], "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        _sys.stdout.write(text)


def _json_cell(cell):
    if isinstance(cell, (bool, str)):
        return cell
    if isinstance(cell, (int, np.integer)):
        return int(cell)
    return float(cell)


def cmd_kernel(settings, args):
    sys = system_from_settings(settings)
    points = args.points if args.points is not None else 50
    if points < 2:
        raise ConfigError("key 'points': need at least 2")
    t_lo = _parse_float(args.from_, "from") if args.from_ is not None else 0.0
    t_hi = (
        _parse_float(args.to, "to")
        if args.to is not None
        else 20.0 / sys.osc1.omega
    )
    ts = np.linspace(t_lo, t_hi, points)
    analytic = eval_phi(response_kernel(sys), ts)
    brute = phi_trace_grid(sys, ts, tail_tol=settings["tail-tol"])
    rows = [
        (t, a, b, abs(a - b)) for t, a, b in zip(ts, analytic, brute)
    ]
    emit(settings, "kernel", ("t", "phi_analytic", "phi_oracle", "abs_diff"), rows)
    return EXIT_OK


def cmd_friction(settings, args):
    sys = system_from_settings(settings)
    spec = quadrature_spec(settings)
    decomp = friction_force_time_domain(sys, spec)
    closed, quad, _ = friction_routes(sys, spec)
    spectral = friction_force_spectral(sys)
    rows = []
    for name, vec in (
        ("omega1_term", decomp.omega1_term),
        ("omega2_term", decomp.omega2_term),
        ("reversible_coefficient", decomp.reversible_coefficient),
        ("friction_closed_form", closed),
        ("friction_quadrature", quad),
        ("friction_spectral", spectral),
    ):
        rows.append((name, vec[0], vec[1], vec[2]))
    emit(settings, "friction", ("quantity", "x", "y", "z"), rows)
    return EXIT_OK


def cmd_spectral_density(settings, args):
    sys = system_from_settings(settings)
    w1 = sys.osc1.omega
    lo = _parse_float(args.from_, "from") if args.from_ is not None else -0.55 * w1
    hi = _parse_float(args.to, "to") if args.to is not None else 0.55 * w1
    points = args.points if args.points is not None else 1101
    if points < 2:
        raise ConfigError("key 'points': need at least 2")
    span = 20.0 * sys.motion.eta
    if lo > -span or hi < span:
        raise ConfigError(
            f"spectral-density grid must span at least +-{_fmt(span)} "
            f"(20 eta) around resonance"
        )
    grid = np.linspace(lo, hi, points)
    samples = friction_spectral_density(sys, grid)
    integral = density_grid_integral(samples)
    prefactor = resonant_prefactor(sys)
    rows = [
        (o2, d[0], d[1], d[2]) for o2, d in zip(samples.grid, samples.density)
    ]
    extra = [
        ("grid_integral", ",".join(_fmt(v) for v in integral)),
        ("resonant_prefactor", ",".join(_fmt(v) for v in prefactor)),
    ]
    emit(
        settings,
        "spectral-density",
        ("detuning", "density_x", "density_y", "density_z"),
        rows,
        extra_meta=extra,
    )
    return EXIT_OK


def cmd_dissipation(settings, args):
    sys = system_from_settings(settings)
    spec = quadrature_spec(settings)
    eta = sys.motion.eta
    protocol = damped_ramp(eta)
    kernel = phi_AA_from_motion(sys)
    closed = dissipation_closed_form(sys, spec)
    general = dissipation_general(protocol, kernel, eta, spec)
    leading = dissipation_leading_order(protocol, kernel, eta, spec)
    scale = max(abs(closed.energy), 1e-300)
    rows = [
        (r.route, r.energy, r.error_estimate,
         abs(r.energy - closed.energy) / scale)
        for r in (closed, general, leading)
    ]
    emit(
        settings,
        "dissipation",
        ("route", "energy", "error_estimate", "rel_dev_from_closed"),
        rows,
    )
    return EXIT_OK


def _sweep_system(settings, axis, value):
    updated = dict(settings)
    if axis == "beta":
        updated["beta"] = value
    elif axis == "eta":
        updated["eta"] = value
    elif axis == "omega2":
        updated["omega2"] = value
    elif axis == "velocity-magnitude":
        direction = np.asarray(settings["velocity"], dtype=float)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            raise ConfigError(
                "key 'velocity': sweep over velocity-magnitude needs a "
                "nonzero base velocity to define the direction"
            )
        updated["velocity"] = tuple(direction / norm * value)
    return system_from_settings(updated)


def cmd_sweep(settings, args):
    if args.axis is None:
        raise ConfigError("key 'axis': sweep requires --axis")
    if args.from_ is None or args.to is None:
        raise ConfigError("key 'from'/'to': sweep requires both bounds")
    points = args.points if args.points is not None else 21
    if points < 2:
        raise ConfigError("key 'points': need at least 2")
    lo = _parse_float(args.from_, "from")
    hi = _parse_float(args.to, "to")
    values = np.linspace(lo, hi, points)
    spec = quadrature_spec(settings)
    rows = []
    for value in values:
        sys = _sweep_system(settings, args.axis, value)
        decomp = friction_force_time_domain(sys, spec)
        prefactor = resonant_prefactor(sys)
        energy = dissipation_closed_form(sys, spec).energy
        f = decomp.friction
        rows.append(
            (
                value,
                f[0],
                f[1],
                f[2],
                float(np.linalg.norm(f)),
                float(np.linalg.norm(prefactor)),
                energy,
            )
        )
    emit(
        settings,
        "sweep",
        (
            args.axis,
            "friction_x",
            "friction_y",
            "friction_z",
            "friction_mag",
            "prefactor_mag",
            "dissipation_closed",
        ),
        rows,
    )
    return EXIT_OK


def _check(name, measured, tolerance):
    status = "pass" if measured <= tolerance else "FAIL"
    return {
        "name": name,
        "status": status,
        "measured": float(measured),
        "tolerance": float(tolerance),
    }


def run_verify_checks(settings):
    """The cross-check suite behind the ``verify`` subcommand."""
    sys = system_from_settings(settings)
    spec = quadrature_spec(settings)
    eta = sys.motion.eta
    w1 = sys.osc1.omega
    checks = []

    # closed-form kernel against the Fock-trace oracle
    ts = np.linspace(0.0, 20.0 / w1, 50)
    analytic = eval_phi(response_kernel(sys), ts)
    brute = phi_trace_grid(sys, ts, tail_tol=settings["tail-tol"])
    scale = float(np.max(np.abs(brute)))
    checks.append(
        _check("kernel-vs-oracle",
               float(np.max(np.abs(analytic - brute))) / scale, 1e-8)
    )

    # damped first moment: quadrature against the closed form
    worst = 0.0
    for w2 in (w1, sys.osc2.omega):
        closed = first_moment_closed_form(w1, w2, eta)

        def integrand(t, _w2=w2):
            return t * np.exp(-eta * t) * np.cos(w1 * t) * np.sin(_w2 * t)

        quad = integrate_semi_infinite_damped(integrand, eta, w1 + w2, spec)
        worst = max(worst, abs(quad - closed) / max(abs(closed), 1e-300))
    checks.append(_check("first-moment-identity", worst, 1e-8))

    # Lorentzian-squared normalization, eta-independent
    worst = max(
        abs(lorentzian_squared_norm(e) - math.pi / 2.0)
        for e in (1e-6, 1e-2, 1e2)
    )
    checks.append(_check("lorentzian-norm", worst, 1e-10))

    # damped-ramp identities
    protocol = damped_ramp(eta)
    speed = integrate_semi_infinite_damped(
        lambda t: np.asarray(protocol.qdot(t)) ** 2, eta, eta, spec
    )
    checks.append(
        _check("ramp-speed-squared",
               abs(speed - 1.0 / (4.0 * eta)) * 4.0 * eta, 1e-10)
    )
    checks.append(
        _check("ramp-reversible-null", abs(reversible_null_check(protocol, spec)),
               1e-12)
    )

    # three-route friction agreement
    closed, quad, _ = friction_routes(sys, spec)
    spectral = friction_force_spectral(sys)
    scale = max(float(np.max(np.abs(closed))), 1e-300)
    worst = max(
        float(np.max(np.abs(closed - quad))),
        float(np.max(np.abs(closed - spectral))),
        float(np.max(np.abs(quad - spectral))),
    )
    checks.append(_check("friction-route-agreement", worst / scale, 1e-8))

    # detuning-density integral converges to the resonant prefactor
    devs = []
    for e in (1e-2 * w1, 5e-3 * w1):
        probe = canonical_system(
            m1=sys.osc1.mass,
            m2=sys.osc2.mass,
            omega1=w1,
            omega2=w1,
            hbar=sys.thermal.hbar,
            beta=sys.thermal.beta,
            eta=e,
            grad_psi=tuple(sys.coupling.grad_psi),
            psi0=sys.coupling.psi0,
            velocity=tuple(sys.motion.velocity),
        )
        grid = _graded_detuning_grid(0.55 * w1, 2001)
        integral = density_grid_integral(friction_spectral_density(probe, grid))
        prefactor = resonant_prefactor(probe)
        scale = max(float(np.max(np.abs(prefactor))), 1e-300)
        devs.append(float(np.max(np.abs(integral - prefactor))) / scale)
    checks.append(_check("delta-normalization", devs[0], 0.02))
    checks.append(
        _check("delta-normalization-improves", devs[1] / devs[0], 1.0)
    )

    # zero temperature: detuning term exactly zero, friction itself O(eta)
    cold = canonical_system(beta=math.inf, eta=eta)
    cold_half = canonical_system(beta=math.inf, eta=eta / 2.0)
    decomp = friction_force_time_domain(cold, spec)
    checks.append(
        _check("zero-temperature-detuning-term",
               float(np.max(np.abs(decomp.omega2_term))), 0.0)
    )
    ratio = float(
        np.max(np.abs(decomp.friction))
        / np.max(np.abs(friction_force_time_domain(cold_half, spec).friction))
    )
    checks.append(_check("zero-temperature-linear-in-eta", abs(ratio - 2.0), 0.4))

    # dissipation routes
    kernel_AA = phi_AA_from_motion(sys)
    closed_d = dissipation_closed_form(sys, spec)
    general_d = dissipation_general(damped_ramp(eta), kernel_AA, eta, spec)
    leading_d = dissipation_leading_order(damped_ramp(eta), kernel_AA, eta, spec)
    scale = max(abs(closed_d.energy), 1e-300)
    checks.append(
        _check("dissipation-leading-vs-closed",
               abs(leading_d.energy - closed_d.energy) / scale, 1e-8)
    )
    checks.append(
        _check("dissipation-general-vs-closed",
               abs(general_d.energy - closed_d.energy) / scale, eta / w1)
    )
    return checks


def _graded_detuning_grid(span, points, sharpness=6.0):
    """Symmetric detuning grid clustered around resonance."""
    u = np.linspace(-1.0, 1.0, points)
    return span * np.sinh(sharpness * u) / math.sinh(sharpness)


def cmd_verify(settings, args):
    checks = run_verify_checks(settings)
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        print(f"{c['name']:<{width}}  {c['status']:>4}  "
              f"measured={_fmt(c['measured'])}  tolerance={_fmt(c['tolerance'])}")
    if settings["out"]:
        emit(
            settings,
            "verify",
            ("name", "status", "measured", "tolerance"),
            [],
            checks=checks,
        )
    failed = [c for c in checks if c["status"] != "pass"]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed")
        return EXIT_CHECK_FAILED
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


_COMMANDS = {
    "kernel": cmd_kernel,
    "friction": cmd_friction,
    "spectral-density": cmd_spectral_density,
    "dissipation": cmd_dissipation,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        return _COMMANDS[args.command](settings, args)
    except (ConfigError, ValidationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_BAD_CONFIG
    except (ConvergenceError, RouteDisagreementError) as exc:
        print(f"check failed: {exc}", file=_sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
