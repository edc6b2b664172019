"""Command-line interface.

Subcommands
-----------
lattice-info
    Invariants, half-period values, and eta constants of a lattice.
eval
    Evaluate a Weierstrass function at a list of points.
rational-solve / torus-solve
    Integrate a critical-value family from t = 0 to 1 and emit the
    trajectory.
verify
    Solve a family, recover the endpoint critical values by contour
    quadrature, and compare them with the configured targets.
nuttall-partition
    Classify the plane into the three sheets and emit the field.
nuttall-critical
    Critical points of the pair-difference field at a given alpha.
nuttall-threshold
    The alpha where the two critical points collide on the real axis.

Every command reads ``--config`` where input data is needed and writes to
``--out`` (standard output when omitted).  Errors exit nonzero with the
error class name on standard error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .errors import EllipflowError, IoError, SchemaError, ValidationError
from .fileio import (emit, load_family_config, load_json_document,
                     _as_complex, _as_complex_list, _require_keys, _pair)
from .lattice import (invariants, log_abs_sigma, log_sigma, make_lattice,
                      sigma, wp, wp_prime, zeta_w)
from .nuttall import (classify_sheets, critical_points, make_context,
                      psi, psi_root)
from .ode import IntegratorConfig
from .rational import (RationalFamilySpec, critical_values_quadrature,
                       solve_rational_family)
from .torus import solve_torus_family, torus_critical_values

_EVAL_FUNCTIONS = {
    "wp": wp,
    "wp-prime": wp_prime,
    "zeta": zeta_w,
    "sigma": sigma,
    "log-sigma": log_sigma,
    "log-abs-sigma": log_abs_sigma,
}

_COMMANDS = ("lattice-info", "eval", "rational-solve", "torus-solve",
             "verify", "nuttall-partition", "nuttall-critical",
             "nuttall-threshold")


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: one command plus its options."""

    command: str
    config: str | None = None
    out: str | None = None
    fmt: str = "json"
    tol: float | None = None
    grid: int = 400
    alpha: float | None = None
    checkpoints: tuple = field(default=(0.0, 0.5, 1.0))

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.tol is not None and not self.tol > 0:
            raise ValidationError("tolerance must be positive")
        if self.grid < 2:
            raise ValidationError("grid resolution must be at least 2")
        for t in self.checkpoints:
            if not 0.0 <= t <= 1.0:
                raise ValidationError("checkpoints must lie in [0, 1]")


def _parse_checkpoints(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ValidationError(f"bad checkpoint list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellipflow",
        description="Weierstrass-function toolkit: critical-value flows "
                    "and three-sheet partitions.")
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", help="input JSON config")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", dest="fmt", default="json",
                        choices=("csv", "json", "svg"))
    parser.add_argument("--tol", type=float, default=None,
                        help="solver/comparison tolerance")
    parser.add_argument("--grid", type=int, default=400,
                        help="grid resolution per axis")
    parser.add_argument("--alpha", type=float, default=None,
                        help="branch-point parameter")
    parser.add_argument("--checkpoints", default="0,0.5,1",
                        help="comma-separated t values to report")
    return parser


def _integrator_config(tol: float | None) -> IntegratorConfig:
    if tol is None:
        return IntegratorConfig()
    return IntegratorConfig(rel_tol=tol, abs_tol=1e-2 * tol)


def _load_lattice(doc: dict, where: str):
    omega1 = _as_complex(doc["omega1"], f"{where}.omega1")
    omega2 = _as_complex(doc["omega2"], f"{where}.omega2")
    return invariants(make_lattice(omega1, omega2))


def _require_config(cfg: RunConfig) -> str:
    if cfg.config is None:
        raise ValidationError(f"{cfg.command} requires --config")
    return cfg.config


def _require_alpha(cfg: RunConfig) -> float:
    if cfg.alpha is None:
        raise ValidationError(f"{cfg.command} requires --alpha")
    return cfg.alpha


def _cmd_lattice_info(cfg: RunConfig):
    path = _require_config(cfg)
    doc = load_json_document(path)
    _require_keys(doc, {"v", "kind", "omega1", "omega2"}, set(), path)
    if doc["kind"] != "lattice":
        raise SchemaError(f"{path}: 'kind' must be 'lattice'")
    inv = _load_lattice(doc, path)
    return {"kind": "lattice-info",
            "omega1": _pair(inv.lattice.omega1),
            "omega2": _pair(inv.lattice.omega2),
            "g2": _pair(inv.g2), "g3": _pair(inv.g3),
            "eta1": _pair(inv.eta1), "eta2": _pair(inv.eta2),
            "e1": _pair(inv.e1), "e2": _pair(inv.e2), "e3": _pair(inv.e3)}


def _cmd_eval(cfg: RunConfig):
    path = _require_config(cfg)
    doc = load_json_document(path)
    _require_keys(doc, {"v", "kind", "omega1", "omega2", "function",
                        "points"}, set(), path)
    if doc["kind"] != "eval":
        raise SchemaError(f"{path}: 'kind' must be 'eval'")
    name = doc["function"]
    if name not in _EVAL_FUNCTIONS:
        raise SchemaError(f"{path}: unknown function {name!r}; choose from "
                          f"{sorted(_EVAL_FUNCTIONS)}")
    inv = _load_lattice(doc, path)
    points = _as_complex_list(doc["points"], f"{path}.points")
    values = [complex(_EVAL_FUNCTIONS[name](z, inv)) for z in points]
    return {"kind": "eval", "function": name,
            "points": [_pair(z) for z in points],
            "values": [_pair(v) for v in values]}


def _cmd_solve(cfg: RunConfig):
    spec = load_family_config(_require_config(cfg))
    integrator = _integrator_config(cfg.tol)
    if isinstance(spec, RationalFamilySpec):
        return solve_rational_family(spec, integrator,
                                     checkpoints=cfg.checkpoints)
    return solve_torus_family(spec, integrator, checkpoints=cfg.checkpoints)


def _cmd_verify(cfg: RunConfig):
    spec = load_family_config(_require_config(cfg))
    tol = cfg.tol if cfg.tol is not None else 1e-6
    # solve at least as tightly as the comparison asks, within what
    # double precision can deliver
    integrator = _integrator_config(max(1e-12, min(tol * 1e-2, 1e-10)))
    if isinstance(spec, RationalFamilySpec):
        traj = solve_rational_family(spec, integrator)
        computed = critical_values_quadrature(traj.endpoint, spec)
    else:
        traj = solve_torus_family(spec, integrator)
        # drop A_0 = 0 at the base point; paths cover k = 1..n
        computed = torus_critical_values(traj.endpoint)[1:]
    targets = [complex(p.value(1.0)) for p in spec.paths]
    errors = [float(abs(complex(c) - t)) for c, t in zip(computed, targets)]
    return {"kind": "verify", "tol": float(tol),
            "targets": [_pair(t) for t in targets],
            "computed": [_pair(c) for c in computed],
            "errors": errors, "max_error": max(errors),
            "ok": bool(max(errors) <= tol)}


def _cmd_partition(cfg: RunConfig):
    ctx = make_context(_require_alpha(cfg))
    return classify_sheets(ctx, resolution=cfg.grid)


def _cmd_critical(cfg: RunConfig):
    alpha = _require_alpha(cfg)
    points = critical_points(alpha)
    return {"kind": "critical-points", "alpha": alpha,
            "points": [_pair(z) for z in points],
            "psi": psi(alpha)}


def _cmd_threshold(cfg: RunConfig):
    return {"kind": "threshold", "alpha_star": psi_root()}


def execute(cfg: RunConfig):
    """Run one command and return the object to serialize."""
    handlers = {
        "lattice-info": _cmd_lattice_info,
        "eval": _cmd_eval,
        "rational-solve": _cmd_solve,
        "torus-solve": _cmd_solve,
        "verify": _cmd_verify,
        "nuttall-partition": _cmd_partition,
        "nuttall-critical": _cmd_critical,
        "nuttall-threshold": _cmd_threshold,
    }
    return handlers[cfg.command](cfg)


def run(argv=None) -> int:
    """Parse arguments, execute, serialize.  Returns the exit code."""
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, config=args.config,
                        out=args.out, fmt=args.fmt, tol=args.tol,
                        grid=args.grid, alpha=args.alpha,
                        checkpoints=_parse_checkpoints(args.checkpoints))
        result = execute(cfg)
        text = emit(result, cfg.fmt, cfg.out)
        if text is not None:
            sys.stdout.write(text)
        if cfg.command == "verify" and not result["ok"]:
            return 1
        return 0
    except EllipflowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{IoError.__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    raise SystemExit(run(argv))
