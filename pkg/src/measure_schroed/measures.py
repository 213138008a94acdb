"""Signed measures on the real line made of Dirac atoms and piecewise-constant density.

A :class:`Measure` is stored as a sum of *parts*.  Each part is either a finite
(aperiodic) collection of atoms and density pieces, or one period cell of a
periodic measure.  Keeping incommensurate periodic parts separate makes sums
such as ``nu_tilde + scale_pushforward(nu, alpha)`` exact on every window, with
no need to truncate the quasi-periodic result.  All queries go through
:meth:`Measure.window`, which materializes the merged atoms and disjoint
density pieces on a bounded closed interval.

Atoms at coincident positions combine only when their coordinates are
bit-identical floats.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

# periods p1, p2 count as commensurate if p1/p2 is within this of a small fraction
PERIOD_RTOL = 1e-12
MAX_PERIOD_DENOMINATOR = 10**6


@dataclass(frozen=True)
class Atom:
    pos: float
    weight: float


@dataclass(frozen=True)
class DensityPiece:
    """Constant density ``value`` (w.r.t. Lebesgue measure) on ``[lo, hi]``."""

    lo: float
    hi: float
    value: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"density piece needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def origin(cls, x: float) -> "Interval":
        """The interval between 0 and ``x``: ``[min(x, 0), max(x, 0)]``."""
        return cls(min(x, 0.0), max(x, 0.0))

    @classmethod
    def origin_cut(cls, x: float, t: float) -> Optional["Interval"]:
        """Part of ``Interval.origin(x)`` lying between ``t`` and ``x``; None if empty."""
        base = cls.origin(x)
        lo = max(base.lo, min(t, x))
        hi = min(base.hi, max(t, x))
        if lo > hi:
            return None
        return cls(lo, hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def shift(self, x: float) -> "Interval":
        return Interval(self.lo + x, self.hi + x)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class _Part(NamedTuple):
    atoms: tuple  # tuple[Atom], sorted, nonzero weights
    density: tuple  # tuple[DensityPiece], sorted, disjoint, nonzero values
    period: Optional[float]


def _merge_atoms(atoms: Iterable[Atom]) -> tuple:
    acc: dict[float, list[float]] = {}
    for a in atoms:
        acc.setdefault(a.pos, []).append(a.weight)
    out = []
    for pos in sorted(acc):
        w = math.fsum(acc[pos])
        if w != 0.0:
            out.append(Atom(pos, w))
    return tuple(out)


def _refine(pieces: Sequence[DensityPiece]) -> tuple:
    """Sum possibly-overlapping pieces into sorted disjoint pieces (zeros dropped)."""
    if not pieces:
        return ()
    by_lo = sorted(pieces, key=lambda p: p.lo)
    cuts = sorted({p.lo for p in pieces} | {p.hi for p in pieces})
    active: dict[int, float] = {}
    ends: list[tuple[float, int]] = []
    out: list[DensityPiece] = []
    j = 0
    for a, b in zip(cuts, cuts[1:]):
        while ends and ends[0][0] <= a:
            _, idx = heapq.heappop(ends)
            active.pop(idx, None)
        while j < len(by_lo) and by_lo[j].lo <= a:
            active[j] = by_lo[j].value
            heapq.heappush(ends, (by_lo[j].hi, j))
            j += 1
        v = math.fsum(active.values()) if active else 0.0
        if v == 0.0:
            continue
        if out and out[-1].hi == a and out[-1].value == v:
            out[-1] = DensityPiece(out[-1].lo, b, v)
        else:
            out.append(DensityPiece(a, b, v))
    return tuple(out)


def _wrap(x: float, p: float) -> float:
    r = x % p
    return 0.0 if r == p else r


def _make_part(atoms: Iterable[Atom], density: Iterable[DensityPiece], period: Optional[float]) -> _Part:
    atoms = list(atoms)
    density = list(density)
    for a in atoms:
        if not (math.isfinite(a.pos) and math.isfinite(a.weight)):
            raise ValueError(f"atom must be finite, got {a}")
    for d in density:
        if not math.isfinite(d.value):
            raise ValueError(f"density value must be finite, got {d}")
    if period is None:
        return _Part(_merge_atoms(atoms), _refine(density), None)

    p = float(period)
    if not (math.isfinite(p) and p > 0):
        raise ValueError(f"period must be positive and finite, got {period}")
    cell_atoms = [Atom(_wrap(a.pos, p), a.weight) for a in atoms]
    cell_pieces = []
    for d in density:
        if not (math.isfinite(d.lo) and math.isfinite(d.hi)):
            raise ValueError("periodic density pieces must be bounded")
        if d.hi - d.lo > p * (1 + PERIOD_RTOL):
            raise ValueError(f"density piece [{d.lo}, {d.hi}] longer than period {p}")
        shift = math.floor(d.lo / p) * p
        lo, hi = d.lo - shift, d.hi - shift
        if lo >= p:
            lo, hi = lo - p, hi - p
        if hi <= p:
            cell_pieces.append(DensityPiece(lo, min(hi, p), d.value))
        else:
            cell_pieces.append(DensityPiece(lo, p, d.value))
            if hi - p > 0:
                cell_pieces.append(DensityPiece(0.0, min(hi - p, p), d.value))
    return _Part(_merge_atoms(cell_atoms), _refine(cell_pieces), p)


def common_period(p1: float, p2: float) -> Optional[float]:
    """Least common multiple of two periods, or None if they look incommensurate."""
    if p1 == p2:
        return p1
    ratio = Fraction(p1 / p2).limit_denominator(MAX_PERIOD_DENOMINATOR)
    if ratio == 0 or abs(float(ratio) - p1 / p2) > PERIOD_RTOL * (p1 / p2):
        return None
    # p1/p2 = n/d  ->  d*p1 = n*p2
    cand = [ratio.denominator * p1, ratio.numerator * p2]
    for c in cand:
        if c == round(c):
            return c
    return cand[0] if ratio.denominator <= ratio.numerator else cand[1]


class Measure:
    """Signed Borel measure with atoms and piecewise-constant density.

    ``Measure(atoms, density, period)`` builds a single part.  With ``period``
    set, the atoms and pieces describe one period and are wrapped into the
    cell ``[0, period)``.  Without it they are taken literally and density
    pieces may extend to +-inf (``lebesgue()`` is the piece (-inf, inf)).

    Values are immutable; arithmetic returns new measures.
    """

    __slots__ = ("_parts",)

    def __init__(self, atoms: Iterable[Atom] = (), density: Iterable[DensityPiece] = (),
                 period: Optional[float] = None):
        part = _make_part(atoms, density, period)
        object.__setattr__(self, "_parts", () if _part_empty(part) else (part,))

    def __setattr__(self, name, value):
        raise AttributeError("Measure is immutable")

    @classmethod
    def _from_parts(cls, parts: Iterable[_Part]) -> "Measure":
        merged: dict = {}
        for part in parts:
            key = part.period
            if key in merged:
                prev = merged[key]
                part = _make_part(prev.atoms + part.atoms, prev.density + part.density, key)
            merged[key] = part
        obj = cls.__new__(cls)
        keep = tuple(p for k, p in sorted(merged.items(), key=lambda kv: (kv[0] is not None, kv[0] or 0.0))
                     if not _part_empty(p))
        object.__setattr__(obj, "_parts", keep)
        return obj

    @property
    def parts(self) -> tuple:
        return self._parts

    @property
    def is_zero(self) -> bool:
        return not self._parts

    @property
    def period(self) -> Optional[float]:
        """A common period of all parts, or None if the measure is not periodic."""
        if not self._parts:
            return None
        period = None
        for part in self._parts:
            if part.period is None:
                return None
            period = part.period if period is None else common_period(period, part.period)
            if period is None:
                return None
        return period

    @property
    def is_finite_description(self) -> bool:
        """True if every part is aperiodic, i.e. finitely many atoms and breakpoints."""
        return all(p.period is None for p in self._parts)

    def window(self, lo: float, hi: float) -> tuple[list[Atom], list[DensityPiece]]:
        """Merged atoms in ``[lo, hi]`` and disjoint density pieces clipped to it."""
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ValueError(f"window must be a bounded interval, got [{lo}, {hi}]")
        atoms: list[Atom] = []
        pieces: list[DensityPiece] = []
        for part in self._parts:
            a, d = _part_window(part, lo, hi)
            atoms.extend(a)
            pieces.extend(d)
        if len(self._parts) > 1:
            return list(_merge_atoms(atoms)), list(_refine(pieces))
        return atoms, pieces

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        atoms, pieces = self.window(lo, hi)
        pts = {a.pos for a in atoms}
        for d in pieces:
            pts.add(d.lo)
            pts.add(d.hi)
        return sorted(pts)

    def cell(self) -> tuple[list[Atom], list[DensityPiece]]:
        """Atoms and density of one period ``[0, period)``, or of the whole finite description."""
        p = self.period
        if p is not None:
            atoms, pieces = self.window(0.0, p)
            return [a for a in atoms if a.pos < p], pieces
        if not self.is_finite_description:
            raise ValueError("measure has neither a period nor a finite description")
        atoms = _merge_atoms(a for part in self._parts for a in part.atoms)
        pieces = _refine([d for part in self._parts for d in part.density])
        return list(atoms), list(pieces)

    @property
    def atoms(self) -> list[Atom]:
        return self.cell()[0]

    @property
    def density(self) -> list[DensityPiece]:
        return self.cell()[1]

    def scaled(self, c: float) -> "Measure":
        if c == 0:
            return Measure()
        return Measure._from_parts(
            _Part(tuple(Atom(a.pos, c * a.weight) for a in part.atoms),
                  tuple(DensityPiece(d.lo, d.hi, c * d.value) for d in part.density),
                  part.period)
            for part in self._parts)

    def __add__(self, other: "Measure") -> "Measure":
        if not isinstance(other, Measure):
            return NotImplemented
        return Measure._from_parts(self._parts + other._parts)

    def __neg__(self) -> "Measure":
        return self.scaled(-1.0)

    def __sub__(self, other: "Measure") -> "Measure":
        if not isinstance(other, Measure):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c: float) -> "Measure":
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        if not self._parts:
            return "Measure(0)"
        chunks = []
        for part in self._parts:
            chunks.append(f"<{len(part.atoms)} atoms, {len(part.density)} pieces, period={part.period}>")
        return "Measure(" + " + ".join(chunks) + ")"


def _part_empty(part: _Part) -> bool:
    return not part.atoms and not part.density


def _part_window(part: _Part, lo: float, hi: float) -> tuple[list[Atom], list[DensityPiece]]:
    atoms: list[Atom] = []
    pieces: list[DensityPiece] = []
    if part.period is None:
        for a in part.atoms:
            if lo <= a.pos <= hi:
                atoms.append(a)
        for d in part.density:
            a_, b_ = max(d.lo, lo), min(d.hi, hi)
            if a_ < b_:
                pieces.append(DensityPiece(a_, b_, d.value))
        return atoms, pieces

    p = part.period
    k0 = math.floor(lo / p) - 1
    k1 = math.floor(hi / p) + 1

    def shifted(e: float, k: int) -> float:
        # cell end p shifted by k must coincide with cell start 0 shifted by k + 1
        return (k + 1) * p if e == p else e + k * p

    for k in range(k0, k1 + 1):
        for a in part.atoms:
            x = a.pos + k * p
            if lo <= x <= hi:
                atoms.append(Atom(x, a.weight))
        for d in part.density:
            a_, b_ = max(shifted(d.lo, k), lo), min(shifted(d.hi, k), hi)
            if a_ < b_:
                pieces.append(DensityPiece(a_, b_, d.value))
    # shifted copies may collide on the float grid; merge anyway
    return list(_merge_atoms(atoms)), list(_refine(pieces))


# -- constructors ------------------------------------------------------------

def zero() -> Measure:
    return Measure()


def dirac(pos: float, weight: float = 1.0) -> Measure:
    return Measure([Atom(float(pos), float(weight))])


def lebesgue(value: float = 1.0, period: Optional[float] = None) -> Measure:
    """``value`` times Lebesgue measure; a periodic copy if ``period`` is given."""
    if period is None:
        return Measure(density=[DensityPiece(-math.inf, math.inf, float(value))])
    return Measure(density=[DensityPiece(0.0, float(period), float(value))], period=period)


# -- operations --------------------------------------------------------------

def total_variation(mu: Measure, iv: Interval, *, left_closed: bool = True,
                    right_closed: bool = True) -> float:
    """|mu|(iv): absolute atom weights plus integral of |density| over ``iv``.

    Closed by default; the half-open variants exist for additivity checks.
    """
    atoms, pieces = mu.window(iv.lo, iv.hi)
    terms = []
    for a in atoms:
        if a.pos == iv.lo and not left_closed:
            continue
        if a.pos == iv.hi and not right_closed:
            continue
        terms.append(abs(a.weight))
    for d in pieces:
        terms.append(abs(d.value) * (d.hi - d.lo))
    return math.fsum(terms)


def difference_tv(mu1: Measure, mu2: Measure, iv: Interval) -> float:
    """|mu1 - mu2|(iv); coincident atoms cancel before absolute values are taken."""
    return total_variation(mu1 - mu2, iv)


def loc_norm(mu: Measure, window: Optional[Interval] = None, *, return_exact: bool = False):
    """sup over x of |mu|([x, x+1]).

    Exact for periodic measures and for finite descriptions: the supremum is
    attained with a window end on an atom or density breakpoint, so only those
    placements are scanned.  Any other measure needs ``window``, and the result
    is then only a lower bound (``return_exact=True`` exposes the flag).
    """
    exact = True
    if mu.is_zero:
        value = 0.0
    else:
        p = mu.period
        if p is not None:
            pts = mu.breakpoints(-1.0, p + 1.0)
        elif mu.is_finite_description:
            atoms, pieces = mu.cell()
            finite = [a.pos for a in atoms]
            for d in pieces:
                finite.extend(e for e in (d.lo, d.hi) if math.isfinite(e))
            pts = sorted(set(finite))
            pts = pts + [pts[0] - 2.0, pts[-1] + 2.0] if pts else [0.0]
        elif window is not None:
            exact = False
            pts = [x for x in mu.breakpoints(window.lo, window.hi + 1.0) if x <= window.hi]
            pts += [window.lo, window.hi]
        else:
            raise ValueError("unbounded scan: aperiodic measure needs a scan window")
        value = 0.0
        for b in pts:
            value = max(value,
                        total_variation(mu, Interval(b, b + 1.0)),
                        total_variation(mu, Interval(b - 1.0, b)))
    return (value, exact) if return_exact else value


def translate(mu: Measure, x: float) -> Measure:
    """The measure ``mu(. - x)``: mass moves from ``t`` to ``t + x``."""
    x = float(x)
    parts = []
    for part in mu.parts:
        if part.period is None:
            parts.append(_Part(tuple(Atom(a.pos + x, a.weight) for a in part.atoms),
                               tuple(DensityPiece(d.lo + x, d.hi + x, d.value) for d in part.density),
                               None))
            continue
        p = part.period
        r = x % p
        if r <= PERIOD_RTOL * p or p - r <= PERIOD_RTOL * p:
            parts.append(part)
            continue
        parts.append(_make_part((Atom(a.pos + r, a.weight) for a in part.atoms),
                                (DensityPiece(d.lo + r, d.hi + r, d.value) for d in part.density),
                                p))
    return Measure._from_parts(parts)


def _div(t: float, alpha) -> float:
    if isinstance(alpha, Fraction):
        return float(Fraction(t) / alpha) if math.isfinite(t) else t
    return t / alpha


def scale_pushforward(nu: Measure, alpha) -> Measure:
    """``nu o alpha``, defined by ``(nu o alpha)(A) = nu(alpha * A)``.

    An atom at ``t`` moves to ``t / alpha``; density ``v`` on ``[a, b]`` becomes
    ``alpha * v`` on ``[a/alpha, b/alpha]``; a period ``p`` becomes ``p / alpha``.
    ``alpha`` may be a :class:`fractions.Fraction` for correctly rounded positions.
    """
    if not isinstance(alpha, Fraction):
        alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        return nu
    af = float(alpha)
    parts = []
    for part in nu.parts:
        parts.append(_Part(
            tuple(Atom(_div(a.pos, alpha), a.weight) for a in part.atoms),
            tuple(DensityPiece(_div(d.lo, alpha), _div(d.hi, alpha), af * d.value) for d in part.density),
            None if part.period is None else _div(part.period, alpha)))
    return Measure._from_parts(parts)


def add(mu1: Measure, mu2: Measure) -> Measure:
    return mu1 + mu2


def is_periodic_with(mu: Measure, p: float, rtol: float = 1e-9) -> bool:
    """True if ``p`` is an integer multiple of the measure's period."""
    own = mu.period
    if mu.is_zero:
        return True
    if own is None:
        return False
    k = p / own
    return round(k) >= 1 and abs(k - round(k)) <= rtol * max(1.0, k)
