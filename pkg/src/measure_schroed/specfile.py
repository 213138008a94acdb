"""Reading and writing measure spec files (JSON).

Single-part form::

    {"period": 1.0, "atoms": [{"pos": 0.5, "weight": 1.0}],
     "density": [{"from": 0.0, "to": 0.5, "value": 0.25}]}

Measures with several incommensurate parts (quasi-periodic sums) are written
as ``{"components": [<single-part form>, ...]}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .measures import Atom, DensityPiece, Measure


class SpecError(ValueError):
    """Malformed measure or family spec; the message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _number(value: Any, field: str, *, allow_inf: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if allow_inf and value in ("inf", "-inf", "Infinity", "-Infinity"):
            return float(value.replace("Infinity", "inf"))
        raise SpecError(field, f"expected a number, got {value!r}")
    x = float(value)
    if math.isnan(x) or (math.isinf(x) and not allow_inf):
        raise SpecError(field, f"expected a finite number, got {value!r}")
    return x


def _part_from_spec(data: Any, where: str) -> Measure:
    if not isinstance(data, dict):
        raise SpecError(where or "<root>", "expected a JSON object")
    unknown = set(data) - {"period", "atoms", "density"}
    if unknown:
        raise SpecError(where or "<root>", f"unknown keys {sorted(unknown)}")
    prefix = f"{where}." if where else ""

    period = data.get("period")
    if period is not None:
        period = _number(period, prefix + "period")
        if period <= 0:
            raise SpecError(prefix + "period", "must be positive")

    atoms = []
    raw_atoms = data.get("atoms", [])
    if not isinstance(raw_atoms, list):
        raise SpecError(prefix + "atoms", "expected a list")
    last = -math.inf
    for i, item in enumerate(raw_atoms):
        f = f"{prefix}atoms[{i}]"
        if not isinstance(item, dict) or set(item) != {"pos", "weight"}:
            raise SpecError(f, "expected {\"pos\": number, \"weight\": number}")
        pos = _number(item["pos"], f + ".pos")
        if pos <= last:
            raise SpecError(f + ".pos", "positions must be strictly increasing")
        last = pos
        atoms.append(Atom(pos, _number(item["weight"], f + ".weight")))

    pieces = []
    raw_density = data.get("density", [])
    if not isinstance(raw_density, list):
        raise SpecError(prefix + "density", "expected a list")
    for i, item in enumerate(raw_density):
        f = f"{prefix}density[{i}]"
        if not isinstance(item, dict) or set(item) != {"from", "to", "value"}:
            raise SpecError(f, "expected {\"from\", \"to\", \"value\"}")
        lo = _number(item["from"], f + ".from", allow_inf=period is None)
        hi = _number(item["to"], f + ".to", allow_inf=period is None)
        if not lo < hi:
            raise SpecError(f, "needs from < to")
        pieces.append(DensityPiece(lo, hi, _number(item["value"], f + ".value")))
    order = sorted(range(len(pieces)), key=lambda k: pieces[k].lo)
    for a, b in zip(order, order[1:]):
        if pieces[b].lo < pieces[a].hi:
            raise SpecError(f"{prefix}density[{b}]", f"overlaps density[{a}]")

    try:
        return Measure(atoms, pieces, period)
    except ValueError as exc:
        raise SpecError(where or "<root>", str(exc)) from None


def measure_from_spec(data: Any, where: str = "") -> Measure:
    if isinstance(data, dict) and "components" in data:
        prefix = f"{where}." if where else ""
        comps = data["components"]
        if set(data) != {"components"} or not isinstance(comps, list):
            raise SpecError(prefix + "components", "expected only a list of components")
        total = Measure()
        for i, comp in enumerate(comps):
            total = total + _part_from_spec(comp, f"{prefix}components[{i}]")
        return total
    return _part_from_spec(data, where)


def _fmt(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _part_to_spec(part) -> dict:
    return {
        "period": part.period,
        "atoms": [{"pos": a.pos, "weight": a.weight} for a in part.atoms],
        "density": [{"from": _fmt(d.lo), "to": _fmt(d.hi), "value": d.value} for d in part.density],
    }


def measure_to_spec(mu: Measure) -> dict:
    if len(mu.parts) == 0:
        return {"period": None, "atoms": [], "density": []}
    if len(mu.parts) == 1:
        return _part_to_spec(mu.parts[0])
    return {"components": [_part_to_spec(p) for p in mu.parts]}


def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file: {path}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}", f"invalid JSON ({exc.msg})") from None


def load_measure(path: str | Path) -> Measure:
    return measure_from_spec(read_json(path))


def dump_measure(mu: Measure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(measure_to_spec(mu), indent=2) + "\n", encoding="utf-8")
