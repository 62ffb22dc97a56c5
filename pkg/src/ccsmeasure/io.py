"""JSON, CSV and SVG readers and writers used by the command line.

Measure JSON::

    {"kind": "mixed", "atoms": [[angle, weight], ...],
     "grid": {"cells": M, "masses": [m_0, ..., m_{M-1}]}, "mass": 1.0}

Either ``atoms`` or ``grid`` may be omitted; ``kind`` and ``mass`` are
checked when present. Angles must lie in ``[0, 2pi)``. A preset form is also accepted:
``{"preset": "mgon", "m": 4}``, ``{"preset": "uniform", "cells": 4096}``,
``{"preset": "segment", "theta": 1.5707963267948966}``,
``{"preset": "half_disc", "cells": 4096}`` or ``{"preset": "dirac", "theta": 0}``.

Invalid input raises :class:`ValidationError`, which names the offending
field with a JSON path such as ``$.atoms[3][1]``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from . import circle_measure as cm
from .boundary import ConvexBoundary
from .empirical import ComplexSample
from .randgen import TrigDensity

FLOAT_FMT = "%.17g"


class ValidationError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message

    def diagnostic(self) -> dict:
        return {"error": "validation", "path": self.path, "message": self.message}


# -- generic helpers -------------------------------------------------------

def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError("$", f"invalid JSON in {path}: {exc.msg} at line {exc.lineno}") from None
    except OSError as exc:
        raise ValidationError("$", f"cannot read {path}: {exc.strerror}") from None


def dump_json(obj: Any, path: str | None) -> str:
    text = json.dumps(_plain(obj), indent=1, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _number(value, path: str, lo=-math.inf, hi=math.inf) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {type(value).__name__}")
    x = float(value)
    if not math.isfinite(x):
        raise ValidationError(path, "must be finite")
    if not lo <= x <= hi:
        raise ValidationError(path, f"must lie in [{lo}, {hi}], got {x!r}")
    return x


def _integer(value, path: str, lo: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(path, "expected an integer")
    if value < lo:
        raise ValidationError(path, f"must be >= {lo}")
    return value


def _list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(path, f"expected an array, got {type(value).__name__}")
    return value


def _pairs(value, path: str, names=("first", "second")) -> np.ndarray:
    rows = _list(value, path)
    out = np.empty((len(rows), 2))
    for i, row in enumerate(rows):
        row = _list(row, f"{path}[{i}]")
        if len(row) != 2:
            raise ValidationError(f"{path}[{i}]", f"expected [{names[0]}, {names[1]}]")
        out[i, 0] = _number(row[0], f"{path}[{i}][0]")
        out[i, 1] = _number(row[1], f"{path}[{i}][1]")
    return out


# -- measures --------------------------------------------------------------

def measure_from_json(obj) -> cm.CircleMeasure:
    if not isinstance(obj, dict):
        raise ValidationError("$", "expected an object")
    if "preset" in obj:
        return _preset(obj)
    unknown = set(obj) - {"kind", "atoms", "grid", "mass", "density"}
    if unknown:
        raise ValidationError(f"$.{sorted(unknown)[0]}", "unknown field")
    if "atoms" not in obj and "grid" not in obj:
        raise ValidationError("$", "a measure needs 'atoms', 'grid' or 'preset'")
    atoms = _pairs(obj.get("atoms", []), "$.atoms", ("angle", "weight"))
    for i, (a, w) in enumerate(atoms):
        if not 0.0 <= a < cm.TWO_PI:
            raise ValidationError(f"$.atoms[{i}][0]", "angle must lie in [0, 2pi)")
        if w < 0:
            raise ValidationError(f"$.atoms[{i}][1]", "weight must be nonnegative")
    grid = None
    if "grid" in obj:
        g = obj["grid"]
        if not isinstance(g, dict):
            raise ValidationError("$.grid", "expected {\"cells\": M, \"masses\": [...]}")
        masses = _list(g.get("masses"), "$.grid.masses")
        if not masses:
            raise ValidationError("$.grid.masses", "must not be empty")
        if "cells" in g and _integer(g["cells"], "$.grid.cells") != len(masses):
            raise ValidationError("$.grid.cells", f"says {g['cells']} but {len(masses)} masses given")
        grid = np.array([_number(v, f"$.grid.masses[{i}]", lo=0.0) for i, v in enumerate(masses)])
    if atoms.size == 0 and (grid is None or not grid.any()):
        raise ValidationError("$", "measure has zero mass")
    try:
        m = cm.CircleMeasure.from_atoms(atoms[:, 0], atoms[:, 1], grid=grid)
    except ValueError as exc:
        raise ValidationError("$", str(exc)) from None
    if "mass" in obj:
        mass = _number(obj["mass"], "$.mass", lo=0.0)
        if abs(mass - m.total_mass) > 1e-9 * max(1.0, m.total_mass):
            raise ValidationError("$.mass", f"declared {mass!r} but the parts sum to {m.total_mass!r}")
    if "kind" in obj and obj["kind"] != m.kind:
        raise ValidationError("$.kind", f"declared {obj['kind']!r} but the content is {m.kind!r}")
    return m


def _preset(obj) -> cm.CircleMeasure:
    name = obj["preset"]
    if name == "mgon":
        return cm.regular_polygon(_integer(obj.get("m"), "$.m"))
    if name == "uniform":
        return cm.uniform(_integer(obj.get("cells", cm.DEFAULT_CELLS), "$.cells"))
    if name == "segment":
        return cm.segment(_number(obj.get("theta", math.pi / 2), "$.theta"))
    if name == "dirac":
        return cm.dirac(_number(obj.get("theta", 0.0), "$.theta"))
    if name == "half_disc":
        cells = _integer(obj.get("cells", cm.DEFAULT_CELLS), "$.cells")
        if cells % 4:
            raise ValidationError("$.cells", "must be a multiple of 4")
        return cm.half_disc(cells)
    raise ValidationError("$.preset", f"unknown preset {name!r}")


def measure_to_json(m: cm.CircleMeasure, density: TrigDensity | None = None) -> dict:
    out: dict = {"kind": m.kind, "atoms": np.column_stack([m.angles, m.weights]).tolist()}
    if m.grid is not None:
        out["grid"] = {"cells": m.cells, "masses": m.grid.tolist()}
    out["mass"] = m.total_mass
    if density is not None:
        out["density"] = {"a0": density.a0, "A": density.A.tolist(), "B": density.B.tolist()}
    return out


def read_measure(path: str) -> cm.CircleMeasure:
    return measure_from_json(load_json(path))


# -- samples, points and boundaries ----------------------------------------

def sample_from_json(obj) -> ComplexSample:
    if not isinstance(obj, dict) or "points" not in obj:
        raise ValidationError("$", "expected {\"points\": [[modulus, argument], ...]}")
    pts = _pairs(obj["points"], "$.points", ("modulus", "argument"))
    for i, r in enumerate(pts[:, 0]):
        if r < 0:
            raise ValidationError(f"$.points[{i}][0]", "modulus must be nonnegative")
    if pts.shape[0] == 0:
        raise ValidationError("$.points", "must not be empty")
    return ComplexSample(pts[:, 0], pts[:, 1])


def sample_to_json(s: ComplexSample) -> dict:
    return {"points": np.column_stack([s.moduli, s.arguments]).tolist()}


def points_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict) and "vertices" in obj:
        return _pairs(obj["vertices"], "$.vertices", ("x", "y"))
    return _pairs(obj, "$", ("x", "y"))


def boundary_to_json(b: ConvexBoundary) -> dict:
    return {
        "vertices": b.vertices.tolist(),
        "edge_angles": b.edge_angles.tolist(),
        "edge_lengths": b.edge_lengths.tolist(),
        "is_segment": bool(b.is_segment),
    }


def boundary_from_json(obj) -> ConvexBoundary:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise ValidationError("$", "expected a boundary object with 'vertices'")
    v = _pairs(obj["vertices"], "$.vertices", ("x", "y"))
    if "edge_angles" in obj and "edge_lengths" in obj:
        ang = np.array([_number(x, f"$.edge_angles[{i}]") for i, x in enumerate(_list(obj["edge_angles"], "$.edge_angles"))])
        ln = np.array([_number(x, f"$.edge_lengths[{i}]", lo=0.0) for i, x in enumerate(_list(obj["edge_lengths"], "$.edge_lengths"))])
        if ang.size != v.shape[0] or ln.size != v.shape[0]:
            raise ValidationError("$", "vertices, edge_angles and edge_lengths differ in length")
        return ConvexBoundary(v, ang, ln, bool(obj.get("is_segment", False)))
    try:
        return ConvexBoundary.from_vertices(v)
    except ValueError as exc:
        raise ValidationError("$.vertices", str(exc)) from None


def lambdas_from_json(obj) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError("$", "expected an object mapping \"i,j,k\" to numbers")
    out = {}
    for key, val in obj.items():
        parts = key.split(",")
        if len(parts) != 3 or not all(p.strip().isdigit() for p in parts):
            raise ValidationError(f"$[{key!r}]", "key must look like \"i,j,k\"")
        out[tuple(int(p) for p in parts)] = _number(val, f"$[{key!r}]")
    return out


# -- CSV -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FLOAT_FMT % float(v)


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path: str | None) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path: str) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# -- SVG -------------------------------------------------------------------

def svg_polyline(points, closed: bool = True, margin: float = 0.05,
                 stroke: float = 0.002) -> str:
    """Standalone SVG path of a polyline, y axis pointing up.

    The view box fits the points with a ``margin`` fraction on each side;
    ``stroke`` is in model units.
    """
    p = np.asarray(points, dtype=float)
    lo, hi = p.min(axis=0), p.max(axis=0)
    span = max(float((hi - lo).max()), 1e-9)
    pad = margin * span
    x0, y0 = lo[0] - pad, lo[1] - pad
    w, h = (hi[0] - lo[0]) + 2 * pad, (hi[1] - lo[1]) + 2 * pad
    steps = " L ".join(f"{FLOAT_FMT % x} {FLOAT_FMT % y}" for x, y in p)
    d = f"M {steps}" + (" Z" if closed else "")
    # the group maps y to (2 y0 + h) - y so that y grows upwards on screen
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{FLOAT_FMT % x0} {FLOAT_FMT % y0} {FLOAT_FMT % w} {FLOAT_FMT % h}">\n'
        f'<g transform="translate(0 {FLOAT_FMT % (2 * y0 + h)}) scale(1 -1)">\n'
        f'<path d="{d}" fill="none" stroke="black" stroke-width="{FLOAT_FMT % stroke}"/>\n'
        "</g>\n</svg>\n"
    )


def write_text(text: str, path: str | None) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
