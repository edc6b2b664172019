"""Config loading and emitters for trajectories, sheet fields, and results.

Configs are JSON objects with a schema version field ``"v": 1``.  Complex
numbers are encoded as two-element arrays ``[re, im]`` and affine paths as
objects ``{"start": [re, im], "delta": [re, im]}``.  Unknown keys are
rejected so typos fail loudly.

Emitters accept family specs (JSON, round-trips through the loader),
trajectories (CSV/JSON/SVG), sheet fields (JSON/SVG), and plain result
dictionaries (JSON).  Output is deterministic: identical inputs produce
identical bytes.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .errors import IoError, ParseError, SchemaError, ValidationError
from .lattice import invariants, make_lattice, wp
from .nuttall import SheetField
from .ode import TargetPath
from .rational import RationalFamilySpec, RationalTrajectory
from .torus import (TorusFamilySpec, TorusFamilyState, TorusTrajectory,
                    torus_initial_p2m4p)

SCHEMA_VERSION = 1

# fixed fill colors for the three sheets, and the contour stroke
SHEET_COLORS = ("#4e79a7", "#f28e2b", "#59a14c")
CONTOUR_STROKE = "#111111"


# ---------------------------------------------------------------------------
# schema helpers

def _require_keys(obj: dict, required, optional, where: str):
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")


def _as_complex(value, where: str) -> complex:
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in value)):
        return complex(value[0], value[1])
    raise SchemaError(f"{where}: expected a complex number as [re, im]")


def _as_complex_list(value, where: str) -> tuple:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected an array of [re, im] pairs")
    return tuple(_as_complex(v, f"{where}[{i}]") for i, v in enumerate(value))


def _as_int_list(value, where: str) -> tuple:
    if (not isinstance(value, list)
            or not all(isinstance(v, int) and not isinstance(v, bool)
                       for v in value)):
        raise SchemaError(f"{where}: expected an array of integers")
    return tuple(value)


def _as_path(value, where: str) -> TargetPath:
    if not isinstance(value, dict):
        raise SchemaError(f"{where}: expected {{'start': [re, im], "
                          f"'delta': [re, im]}}")
    _require_keys(value, {"start", "delta"}, set(), where)
    return TargetPath(start=_as_complex(value["start"], f"{where}.start"),
                      delta=_as_complex(value["delta"], f"{where}.delta"))


def _as_path_list(value, where: str) -> tuple:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected an array of paths")
    return tuple(_as_path(v, f"{where}[{i}]") for i, v in enumerate(value))


def load_json_document(path) -> dict:
    """Read a JSON config and check the schema version."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be a JSON object")
    if doc.get("v") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema version 'v' must be "
                          f"{SCHEMA_VERSION}")
    return doc


# ---------------------------------------------------------------------------
# family configs

def _rational_spec_from(doc: dict, where: str) -> RationalFamilySpec:
    _require_keys(doc, {"v", "kind", "m", "n", "a0", "b0", "paths"}, set(),
                  where)
    return RationalFamilySpec(
        m=_as_int_list(doc["m"], f"{where}.m"),
        n=_as_int_list(doc["n"], f"{where}.n"),
        a0=_as_complex_list(doc["a0"], f"{where}.a0"),
        b0=_as_complex_list(doc["b0"], f"{where}.b0"),
        paths=_as_path_list(doc["paths"], f"{where}.paths"))


def _torus_preset_spec(doc: dict, where: str) -> TorusFamilySpec:
    _require_keys(doc, {"v", "kind", "preset", "displacements"}, set(), where)
    if doc["preset"] != "wp-quadratic":
        raise SchemaError(f"{where}: unknown preset {doc['preset']!r}")
    displacements = _as_complex_list(doc["displacements"],
                                     f"{where}.displacements")
    initial = torus_initial_p2m4p()
    if len(displacements) != initial.n:
        raise SchemaError(f"{where}: preset 'wp-quadratic' needs "
                          f"{initial.n} displacements")
    inv = invariants(make_lattice(1.0, initial.omega2))
    starts = []
    for ak in initial.a[1:]:
        w = wp(ak, inv)
        starts.append(complex(w * w - 4.0 * w))
    paths = tuple(TargetPath(start=s, delta=d)
                  for s, d in zip(starts, displacements))
    return TorusFamilySpec(n=initial.n, initial=initial, paths=paths)


def _torus_spec_from(doc: dict, where: str) -> TorusFamilySpec:
    if "preset" in doc:
        return _torus_preset_spec(doc, where)
    _require_keys(doc, {"v", "kind", "n", "initial", "paths"}, set(), where)
    init = doc["initial"]
    if not isinstance(init, dict):
        raise SchemaError(f"{where}.initial: expected an object")
    _require_keys(init, {"a", "c", "omega2"}, {"t"}, f"{where}.initial")
    t = init.get("t", 0.0)
    if isinstance(t, bool) or not isinstance(t, (int, float)):
        raise SchemaError(f"{where}.initial.t: expected a number")
    if not isinstance(doc["n"], int) or isinstance(doc["n"], bool):
        raise SchemaError(f"{where}.n: expected an integer")
    state = TorusFamilyState(
        t=float(t),
        a=_as_complex_list(init["a"], f"{where}.initial.a"),
        c=_as_complex(init["c"], f"{where}.initial.c"),
        omega2=_as_complex(init["omega2"], f"{where}.initial.omega2"))
    return TorusFamilySpec(n=doc["n"], initial=state,
                           paths=_as_path_list(doc["paths"],
                                               f"{where}.paths"))


def load_family_config(path):
    """Load a rational or torus family spec from a JSON config.

    Returns
    -------
    RationalFamilySpec or TorusFamilySpec
        Fully validated spec (all module invariants are checked).

    Raises
    ------
    ParseError
        The file is not valid JSON.
    SchemaError
        Missing or unknown keys, or a bad schema version.
    ValidationError
        Well-formed input that violates a family invariant.
    """
    doc = load_json_document(path)
    kind = doc.get("kind")
    if kind == "rational":
        return _rational_spec_from(doc, str(path))
    if kind == "torus":
        return _torus_spec_from(doc, str(path))
    raise SchemaError(f"{path}: 'kind' must be 'rational' or 'torus'")


# ---------------------------------------------------------------------------
# serialization helpers

def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _path_obj(p: TargetPath) -> dict:
    return {"start": _pair(p.start), "delta": _pair(p.delta)}


def spec_document(spec) -> dict:
    """JSON-ready document for a family spec; loses nothing."""
    if isinstance(spec, RationalFamilySpec):
        return {"v": SCHEMA_VERSION, "kind": "rational",
                "m": list(spec.m), "n": list(spec.n),
                "a0": [_pair(z) for z in spec.a0],
                "b0": [_pair(z) for z in spec.b0],
                "paths": [_path_obj(p) for p in spec.paths]}
    if isinstance(spec, TorusFamilySpec):
        return {"v": SCHEMA_VERSION, "kind": "torus", "n": spec.n,
                "initial": {"t": spec.initial.t,
                            "a": [_pair(z) for z in spec.initial.a],
                            "c": _pair(spec.initial.c),
                            "omega2": _pair(spec.initial.omega2)},
                "paths": [_path_obj(p) for p in spec.paths]}
    raise ValidationError(f"not a family spec: {type(spec).__name__}")


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _trajectory_columns(traj):
    if isinstance(traj, RationalTrajectory):
        state = traj.states[-1]
        names = ([f"a_{k}" for k in range(1, len(state.a) + 1)]
                 + [f"b_{j}" for j in range(1, len(state.b) + 1)])

        def row(s):
            return list(s.a) + list(s.b)

        kind = "rational-trajectory"
    elif isinstance(traj, TorusTrajectory):
        state = traj.states[-1]
        n = state.n
        names = ([f"a_{k}" for k in range(1, n + 1)]
                 + ["a_0", "c", "omega2"])

        def row(s):
            return list(s.a[1:]) + [s.a[0], s.c, s.omega2]

        kind = "torus-trajectory"
    else:
        raise ValidationError(f"not a trajectory: {type(traj).__name__}")
    return kind, names, row


def _trajectory_csv(traj) -> str:
    _, names, row = _trajectory_columns(traj)
    header = "t," + ",".join(f"re({c}),im({c})" for c in names)
    lines = [header]
    for state in traj.checkpoints:
        cells = [_fmt(state.t)]
        for z in row(state):
            z = complex(z)
            cells.append(_fmt(z.real))
            cells.append(_fmt(z.imag))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _trajectory_document(traj) -> dict:
    kind, names, row = _trajectory_columns(traj)
    checkpoints = [{"t": state.t,
                    **{c: _pair(z) for c, z in zip(names, row(state))}}
                   for state in traj.checkpoints]
    return {"v": SCHEMA_VERSION, "kind": kind,
            "columns": list(names), "checkpoints": checkpoints,
            "stats": {"n_accepted": traj.n_accepted,
                      "n_rejected": traj.n_rejected,
                      "n_rhs": traj.n_rhs}}


def _svg_header(xmin, ymin, width, height) -> str:
    return ('<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_fmt(xmin)} {_fmt(ymin)} {_fmt(width)} '
            f'{_fmt(height)}">\n')


def _trajectory_svg(traj) -> str:
    _, names, row = _trajectory_columns(traj)
    states = traj.checkpoints if len(traj.checkpoints) >= 2 else traj.states
    tracks = {name: [] for name in names}
    for state in states:
        for name, z in zip(names, row(state)):
            tracks[name].append(complex(z))
    pts = [z for track in tracks.values() for z in track]
    xs = [z.real for z in pts]
    ys = [z.imag for z in pts]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-9)
    xmin, xmax = xmin - pad, xmax + pad
    ymin, ymax = ymin - pad, ymax + pad
    stroke = 0.004 * max(xmax - xmin, ymax - ymin)
    out = [_svg_header(xmin, -ymax, xmax - xmin, ymax - ymin)]
    for i, name in enumerate(names):
        color = SHEET_COLORS[i % len(SHEET_COLORS)]
        coords = " ".join(f"{_fmt(z.real)},{_fmt(-z.imag)}"
                          for z in tracks[name])
        out.append(f'<polyline fill="none" stroke="{color}" '
                   f'stroke-width="{_fmt(stroke)}" points="{coords}">'
                   f'<title>{name}</title></polyline>\n')
    out.append("</svg>\n")
    return "".join(out)


def _field_document(field: SheetField) -> dict:
    labels = np.ascontiguousarray(field.labels, dtype=np.uint8)
    contours = {}
    for (j, k), polylines in sorted(field.contours.items()):
        contours[f"{j}-{k}"] = [[_pair(z) for z in line]
                                for line in polylines]
    return {"v": SCHEMA_VERSION, "kind": "sheet-field",
            "bounds": [float(b) for b in field.bounds],
            "shape": [int(s) for s in labels.shape],
            "labels_b64": base64.b64encode(labels.tobytes()).decode("ascii"),
            "contours": contours}


def _field_svg(field: SheetField) -> str:
    xmin, xmax, ymin, ymax = (float(b) for b in field.bounds)
    xs, ys, labels = field.xs, field.ys, field.labels
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    out = [_svg_header(xmin, -ymax, xmax - xmin, ymax - ymin)]
    # sheet fills: one rect per run of equal labels along each row
    for i in range(labels.shape[0]):
        rowlab = labels[i]
        y_top = -(ys[i] + 0.5 * dy)
        j = 0
        while j < rowlab.shape[0]:
            k = j
            while k < rowlab.shape[0] and rowlab[k] == rowlab[j]:
                k += 1
            x0 = xs[j] - 0.5 * dx
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y_top)}" '
                       f'width="{_fmt((k - j) * dx)}" height="{_fmt(dy)}" '
                       f'fill="{SHEET_COLORS[int(rowlab[j])]}"/>\n')
            j = k
    stroke = 0.002 * max(xmax - xmin, ymax - ymin)
    for (j, k), polylines in sorted(field.contours.items()):
        for line in polylines:
            coords = " ".join(f"{_fmt(z.real)},{_fmt(-z.imag)}"
                              for z in line)
            out.append(f'<polyline fill="none" stroke="{CONTOUR_STROKE}" '
                       f'stroke-width="{_fmt(stroke)}" points="{coords}">'
                       f'<title>{j}-{k}</title></polyline>\n')
    out.append("</svg>\n")
    return "".join(out)


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit(obj, fmt: str, path=None):
    """Serialize a spec, trajectory, sheet field, or result dictionary.

    Parameters
    ----------
    obj : RationalFamilySpec, TorusFamilySpec, RationalTrajectory,
        TorusTrajectory, SheetField, or dict
    fmt : {"csv", "json", "svg"}
        Trajectories support all three formats, sheet fields "json" and
        "svg", specs and plain dictionaries "json" only.
    path : str or None
        Destination file.  When None the text is returned instead.

    Returns
    -------
    str or None
        The serialized text when path is None.
    """
    if fmt not in ("csv", "json", "svg"):
        raise ValidationError(f"unknown format {fmt!r}")
    if isinstance(obj, (RationalTrajectory, TorusTrajectory)):
        if fmt == "csv":
            text = _trajectory_csv(obj)
        elif fmt == "json":
            text = _json_text(_trajectory_document(obj))
        else:
            text = _trajectory_svg(obj)
    elif isinstance(obj, SheetField):
        if fmt == "json":
            text = _json_text(_field_document(obj))
        elif fmt == "svg":
            text = _field_svg(obj)
        else:
            raise ValidationError("sheet fields serialize to json or svg, "
                                  "not csv")
    elif isinstance(obj, (RationalFamilySpec, TorusFamilySpec)):
        if fmt != "json":
            raise ValidationError("family specs serialize to json only")
        text = _json_text(spec_document(obj))
    elif isinstance(obj, dict):
        if fmt != "json":
            raise ValidationError("result dictionaries serialize to json "
                                  "only")
        text = _json_text({"v": SCHEMA_VERSION, **obj})
    else:
        raise ValidationError(f"cannot serialize {type(obj).__name__}")

    if path is None:
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return None
