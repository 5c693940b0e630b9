"""File formats: run configs, far-field CSV, result tables and reconstructions.

Every file written here starts with a comment naming the package version
and the SHA-256 of the canonical run configuration.  Floats are written with
17 significant digits so values survive a round trip bit for bit, and no
timestamps are recorded, so identical configs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .forward import FarFieldSet
from .geometry import ChebCrack, Crack, CrackSet, GeometryError, TrigCrack

FARFIELD_COLUMNS = ("k", "d_x", "d_y", "xhat_x", "xhat_y", "re", "im", "delta", "seed")


class ConfigError(ValueError):
    """Malformed configuration or data file."""


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def header_line(chash: str) -> str:
    return f"# crackscat {__version__} config-sha256 {chash}"


# -- geometry schema ---------------------------------------------------------

def crack_from_dict(spec: dict) -> Crack:
    try:
        kind = spec.get("type", "cheb")
        if kind == "cheb":
            return ChebCrack(float(spec["d0"]), float(spec["d1"]), tuple(float(v) for v in spec["c"]))
        if kind == "trig":
            terms = [(t[0], int(t[1]), float(t[2])) for t in spec.get("terms", [])]
            return TrigCrack(float(spec["ax0"]), float(spec["ax1"]), terms, float(spec.get("ay0", 0.0)))
    except (KeyError, TypeError, IndexError, GeometryError) as exc:
        raise ConfigError(f"bad crack description {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown crack type {kind!r}")


def crack_to_dict(crack: Crack) -> dict:
    if isinstance(crack, ChebCrack):
        return {"type": "cheb", "d0": crack.d0, "d1": crack.d1, "c": list(crack.c)}
    if isinstance(crack, TrigCrack):
        return {"type": "trig", "ax0": crack.ax0, "ax1": crack.ax1, "ay0": crack.ay0,
                "terms": [list(t) for t in crack.terms]}
    raise TypeError(f"cannot serialize {type(crack).__name__}")


def cracks_from_list(items, d_min: float = 0.05) -> CrackSet:
    if not isinstance(items, list) or not items:
        raise ConfigError("crack list must be a non-empty JSON array")
    return CrackSet([crack_from_dict(c) for c in items], d_min)


# -- JSON --------------------------------------------------------------------

def _dump(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_dump(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(fmt(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + "  " + _dump(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, float, np.floating, np.integer)):
        val = fmt(obj)
        return "null" if val == "nan" or "inf" in val else val
    return json.dumps(obj)


def write_json(path, obj: dict, chash: str) -> Path:
    body = {"header": {"generator": "crackscat", "version": __version__, "config_sha256": chash}}
    body.update(obj)
    path = Path(path)
    path.write_text(_dump(body) + "\n")
    return path


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


# -- CSV ---------------------------------------------------------------------

def write_csv(path, columns, rows, chash: str) -> Path:
    buf = _io.StringIO()
    buf.write(header_line(chash) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    path = Path(path)
    path.write_text(buf.getvalue())
    return path


def read_csv(path):
    """Return ``(columns, rows)``; comment lines are skipped."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise ConfigError(f"{path}: empty CSV")
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, list(reader)


def write_farfield(path, data: FarFieldSet, chash: str) -> Path:
    seed = "" if data.seed is None else int(data.seed)
    rows = [(data.k, data.d[0], data.d[1], x[0], x[1], v.real, v.imag, data.delta, seed)
            for x, v in zip(data.directions, data.values)]
    return write_csv(path, FARFIELD_COLUMNS, rows, chash)


def read_farfield(path) -> FarFieldSet:
    columns, rows = read_csv(path)
    if tuple(columns) != FARFIELD_COLUMNS:
        raise ConfigError(f"{path}: expected columns {','.join(FARFIELD_COLUMNS)}")
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    try:
        arr = np.array([[float(v) for v in r[:8]] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc
    if np.ptp(arr[:, 0]) or np.ptp(arr[:, 1]) or np.ptp(arr[:, 2]):
        raise ConfigError(f"{path}: one file must hold a single (k, d)")
    seed = rows[0][8]
    return FarFieldSet(arr[0, 0], arr[0, 1:3], arr[:, 3:5], arr[:, 5] + 1j * arr[:, 6],
                       delta=float(arr[0, 7]), seed=int(seed) if seed else None)


def write_polyline(path, cracks, chash: str, count: int = 201) -> Path:
    s = np.linspace(-0.999, 0.999, count)
    rows = []
    for j, c in enumerate(cracks):
        pts = c.point(s)
        rows += [(j, sv, p[0], p[1]) for sv, p in zip(s, pts)]
    return write_csv(path, ("crack", "s", "x", "y"), rows, chash)


def write_gnuplot(path, csv_name: str, title: str, zlabel: str, chash: str) -> Path:
    text = "\n".join([
        header_line(chash),
        "set datafile separator ','",
        "set view map",
        "set size ratio -1",
        f"set title '{title}'",
        f"set cblabel '{zlabel}'",
        f"splot '{csv_name}' every ::1 using 1:2:3 with image notitle",
        "",
    ])
    path = Path(path)
    path.write_text(text)
    return path


def reconstruction_dict(state) -> dict:
    return {
        "cracks": [{"d0": c.d0, "d1": c.d1, "c": list(c.c)} for c in state.cracks],
        "p": int(state.p),
        "J_r": float(state.J_r),
        "target_missed": bool(state.target_missed),
    }


def read_reconstruction(path) -> list[ChebCrack]:
    body = read_json(path)
    try:
        return [ChebCrack(float(c["d0"]), float(c["d1"]), tuple(c["c"])) for c in body["cracks"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: not a reconstruction file") from exc
