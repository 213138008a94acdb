"""Quantitative Gordon-type estimates: Gronwall evaluator, stability of solutions
under periodic approximation, the three-block criterion and the eigenvalue
absence probe built on them.

Constants ``C`` in the exponential bounds are never guessed.  Operations
either take ``C`` as input or return the least ``C`` that makes every
checked inequality ``a <= C e^{C|x|}`` hold, obtained in closed form from the
Lambert W function.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import lambertw

from .measures import Interval, Measure, difference_tv, is_periodic_with, loc_norm
from .propagation import State, states_at

NORMALIZATION_TOL = 1e-12
THREE_BLOCK_TOL = 1e-9
PROBE_TOL = 1e-6


def check_normalized(init: State, tol: float = NORMALIZATION_TOL) -> None:
    if init.x != 0.0:
        raise ValueError(f"initial data must sit at x=0, got x={init.x!r}")
    if abs(math.hypot(init.u, init.du) - 1.0) > tol:
        raise ValueError(f"initial data must satisfy u^2 + u'^2 = 1 (got norm {math.hypot(init.u, init.du)!r})")


def unit_init(theta: float) -> State:
    """Normalized initial data ``(cos theta, sin theta)`` at 0."""
    return State(0.0, math.cos(theta), math.sin(theta))


@dataclass(frozen=True)
class ApproximationFamily:
    """A target measure with periodic approximants of strictly increasing periods."""

    target: Measure
    approximants: tuple
    periods: tuple
    convergents: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "approximants", tuple(self.approximants))
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        if len(self.approximants) != len(self.periods):
            raise ValueError("need one period per approximant")
        if not self.approximants:
            raise ValueError("family needs at least one approximant")
        for i, (mu_m, p) in enumerate(zip(self.approximants, self.periods)):
            if not p > 0:
                raise ValueError(f"approximant {i}: period must be positive")
            if not is_periodic_with(mu_m, p):
                raise ValueError(f"approximant {i} is not {p}-periodic")
        if any(b <= a for a, b in zip(self.periods, self.periods[1:])):
            raise ValueError("periods must increase")

    def __len__(self) -> int:
        return len(self.periods)


@dataclass(frozen=True)
class DeviationReport:
    x: float
    deviation: float
    tv: float
    bound_ok: Optional[bool] = None
    bound: Optional[float] = None
    m: Optional[int] = None
    period: Optional[float] = None


@dataclass(frozen=True)
class StabilityReport:
    reports: list
    fitted_C: float

    @property
    def all_ok(self) -> bool:
        return all(r.bound_ok for r in self.reports)


@dataclass(frozen=True)
class ThreeBlockResult:
    n_minus: float
    n_plus: float
    n_double: float
    passed: bool

    @property
    def max_norm(self) -> float:
        return max(self.n_minus, self.n_plus, self.n_double)


@dataclass(frozen=True)
class ProbeResult:
    checkpoints: list  # x chosen per m
    values: list  # |u|^2 + |u'|^2 of the target solution there
    approximant_norms: list  # three-block max for the approximant solution
    deviations: list
    non_decay: bool
    tol: float = PROBE_TOL

    @property
    def chain_ok(self) -> list:
        """Per m: approximant norm >= 1/2 and deviation <= 1/4, the two links of the non-decay argument."""
        return [n >= 0.5 - THREE_BLOCK_TOL and d <= 0.25 + self.tol
                for n, d in zip(self.approximant_norms, self.deviations)]


@dataclass(frozen=True)
class FormBoundResult:
    lhs: float
    rhs: float
    ok: bool


def least_exponential_constant(points: Iterable[tuple[float, float]]) -> float:
    """Least ``C >= 0`` with ``a <= C exp(C |x|)`` for every ``(x, a)``.

    ``C e^{C|x|}`` increases in ``C``, so each point fixes a threshold
    ``W(|x| a) / |x|`` (just ``a`` at ``x = 0``); the answer is the largest.
    """
    best = 0.0
    for x, a in points:
        if a <= 0:
            continue
        if not math.isfinite(a):
            return math.inf
        ax = abs(x)
        if ax == 0:
            c = a
        else:
            c = float(lambertw(ax * a).real) / ax
            # lambertw is accurate to a few ulps; nudge up until the inequality holds
            while c * math.exp(c * ax) < a:
                c = math.nextafter(c, math.inf)
        best = max(best, c)
    return best


# -- Gronwall ----------------------------------------------------------------

def _alpha_fn(alpha):
    if isinstance(alpha, (int, float)):
        a = float(alpha)
        if a < 0:
            raise ValueError("alpha must be nonnegative")
        return (lambda s: a), []
    grid, values = (np.asarray(v, dtype=float) for v in alpha)
    if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 1:
        raise ValueError("alpha must be a constant or a pair (grid, values) of equal length")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("alpha grid must be strictly increasing")
    if np.any(values < 0):
        raise ValueError("alpha must be nonnegative")
    return (lambda s: float(np.interp(s, grid, values))), list(grid)


def _weighted_exp_moments(v: float, h: float) -> tuple[float, float]:
    """(int_0^h v e^{vt} dt, int_0^h t v e^{vt} dt)."""
    z = v * h
    i0 = math.expm1(z)
    if abs(z) < 1e-2:
        # series for h e^{z} - i0 / v, which cancels badly for small z
        i1 = 0.0
        term = v * h * h  # n = 0 term numerator: v h^2 / 0!
        fact = 1.0
        for n in range(12):
            i1 += term / (fact * (n + 2))
            term *= z
            fact *= n + 1
    else:
        i1 = h * math.exp(z) - i0 / v
    return i0, i1


def gronwall_bound(alpha, mu: Measure, x: float) -> float:
    """``alpha(x) + int_{[0,x]} alpha(s) exp(mu([s,x])) dmu(s)`` evaluated exactly.

    ``alpha`` is a nonnegative constant or ``(grid, values)`` interpolated
    piecewise linearly (held constant outside the grid).
    """
    if not x >= 0:
        raise ValueError("x must be nonnegative")
    f, grid = _alpha_fn(alpha)
    if x == 0:
        atoms, pieces = mu.window(0.0, 0.0)
    else:
        atoms, pieces = mu.window(0.0, x)
    if any(a.weight < 0 for a in atoms) or any(d.value < 0 for d in pieces):
        raise ValueError("Gronwall requires a positive measure")

    weights = {a.pos: a.weight for a in atoms}
    stops = {0.0, x} | set(weights)
    for d in pieces:
        stops.update((d.lo, d.hi))
    stops.update(g for g in grid if 0 < g < x)
    stops = sorted(stops)

    terms = [f(x)]
    mass = 0.0  # mu([s, x]) for the current stop s, including an atom at s
    j = len(pieces) - 1
    for i in range(len(stops) - 1, -1, -1):
        s = stops[i]
        w = weights.get(s)
        if w is not None:
            mass += w
            terms.append(f(s) * math.exp(mass) * w)
        if i == 0:
            break
        a = stops[i - 1]
        while j >= 0 and pieces[j].lo >= s:
            j -= 1
        v = pieces[j].value if j >= 0 and pieces[j].lo <= a and s <= pieces[j].hi else 0.0
        if v > 0:
            h = s - a
            fa, fs = f(a), f(s)
            slope = (fs - fa) / h
            i0, i1 = _weighted_exp_moments(v, h)
            terms.append(math.exp(mass) * (fs * i0 - slope * i1))
            mass += v * h
    return math.fsum(terms)


# -- stability ---------------------------------------------------------------

def solution_deviation(mu: Measure, mu_m: Measure, E: float, x: float, init: State,
                       C: Optional[float] = None) -> DeviationReport:
    """Distance of the two solutions' ``(u, u')`` at ``x`` and ``|mu - mu_m|(I_x)``."""
    check_normalized(init)
    s1 = states_at(mu, E, [x], init)[0]
    s2 = states_at(mu_m, E, [x], init)[0]
    dev = math.hypot(s1.u - s2.u, s1.du - s2.du)
    tv = difference_tv(mu, mu_m, Interval.origin(x))
    bound = ok = None
    if C is not None:
        bound = C * math.exp(C * abs(x)) * tv
        ok = dev <= bound
    return DeviationReport(x, dev, tv, ok, bound)


def checkpoints(p: float) -> tuple[float, float, float]:
    return (-p, p, 2 * p)


def stability_bound_check(fam: ApproximationFamily, E: float, init: State,
                          C: float) -> StabilityReport:
    """Check ``dev(x) <= C e^{C|x|} |mu - mu^m|(I_x)`` at ``x in {-p_m, p_m, 2 p_m}``.

    Also returns the least constant for which every check passes
    (``inf`` if some deviation is positive where the measures agree).
    """
    if C < 0:
        raise ValueError("C must be nonnegative")
    check_normalized(init)
    xs = sorted({x for p in fam.periods for x in checkpoints(p)})
    target = dict(zip(xs, states_at(fam.target, E, xs, init)))
    reports = []
    for m, (mu_m, p) in enumerate(zip(fam.approximants, fam.periods), start=1):
        pts = list(checkpoints(p))
        approx = states_at(mu_m, E, pts, init)
        for x, s2 in zip(pts, approx):
            s1 = target[x]
            dev = math.hypot(s1.u - s2.u, s1.du - s2.du)
            tv = difference_tv(fam.target, mu_m, Interval.origin(x))
            bound = C * math.exp(C * abs(x)) * tv
            reports.append(DeviationReport(x, dev, tv, dev <= bound, bound, m, p))
    fitted = least_exponential_constant(
        (r.x, math.inf if r.tv == 0 else r.deviation / r.tv) for r in reports if r.deviation > 0)
    return StabilityReport(reports, fitted)


def growth_envelope_check(mu: Measure, E: float, init: State, x_grid: Sequence[float],
                          *, period: Optional[float] = None) -> float:
    """Least ``C`` with ``|u(x)| <= C e^{C|x|}`` on ``x_grid``."""
    if (mu.period if period is None else period) is None and not mu.is_zero:
        raise ValueError("growth envelope is defined for periodic measures")
    check_normalized(init)
    states = states_at(mu, E, list(x_grid), init)
    return least_exponential_constant((s.x, abs(s.u)) for s in states)


def three_block_test(mu: Measure, E: float, init: State, *,
                     period: Optional[float] = None) -> ThreeBlockResult:
    """Norms of ``(u, u'(.+))`` at ``-p, p, 2p``; passes if the largest is >= 1/2."""
    p = mu.period if period is None else period
    if p is None:
        raise ValueError("three-block test needs a periodic measure (or period=)")
    if not is_periodic_with(mu, p):
        raise ValueError(f"measure is not {p}-periodic")
    check_normalized(init)
    sm, sp, s2 = states_at(mu, E, list(checkpoints(p)), init)
    norms = (sm.norm, sp.norm, s2.norm)
    return ThreeBlockResult(*norms, max(norms) >= 0.5 - THREE_BLOCK_TOL)


def gordon_decay_metric(fam: ApproximationFamily, C: float) -> list[float]:
    """``e^{C p_m} |mu - mu^m|([-p_m, 2 p_m])`` for each approximant."""
    if C < 0:
        raise ValueError("C must be nonnegative")
    out = []
    for mu_m, p in zip(fam.approximants, fam.periods):
        tv = difference_tv(fam.target, mu_m, Interval(-p, 2 * p))
        out.append(0.0 if tv == 0 else math.exp(C * p) * tv)
    return out


def eigenvalue_absence_probe(fam: ApproximationFamily, E: float, init: State,
                             tol: float = PROBE_TOL) -> ProbeResult:
    """Finite-range evidence (not proof) that ``E`` is not an eigenvalue.

    For each approximant the three-block checkpoint with the largest
    approximant norm is selected, and the target solution's
    ``|u|^2 + |u'|^2`` is read there.  ``non_decay`` holds if some value
    reaches ``1/4 - tol``.
    """
    check_normalized(init)
    xs = sorted({x for p in fam.periods for x in checkpoints(p)})
    target = dict(zip(xs, states_at(fam.target, E, xs, init)))
    chosen, values, norms, devs = [], [], [], []
    for mu_m, p in zip(fam.approximants, fam.periods):
        pts = list(checkpoints(p))
        approx = states_at(mu_m, E, pts, init)
        k = max(range(3), key=lambda i: approx[i].norm)
        x = pts[k]
        s = target[x]
        chosen.append(x)
        values.append(s.u * s.u + s.du * s.du)
        norms.append(approx[k].norm)
        devs.append(math.hypot(s.u - approx[k].u, s.du - approx[k].du))
    return ProbeResult(chosen, values, norms, devs, max(values) >= 0.25 - tol, tol)


# -- form bound --------------------------------------------------------------

def form_bound_check(breaks: Sequence[float], values: Sequence[float], mu: Measure, delta: float,
                     *, loc: Optional[float] = None) -> FormBoundResult:
    """``int |u|^2 d|mu| <= 4 delta ||mu||_loc ||u'||^2 + (4 ||mu||_loc / delta) ||u||^2``.

    ``u`` is piecewise linear through ``(breaks, values)`` and vanishes at both
    ends and outside.  Every integral is evaluated in exact rational arithmetic;
    ``ok`` compares the exact values, ``lhs`` and ``rhs`` are rounded once.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    xs = [float(b) for b in breaks]
    us = [float(v) for v in values]
    if len(xs) != len(us) or len(xs) < 2:
        raise ValueError("need matching breakpoints and values (at least two)")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    if us[0] != 0 or us[-1] != 0:
        raise ValueError("test function must vanish at both ends (compact support)")
    if loc is None:
        loc = loc_norm(mu)

    # rational arithmetic on the (exactly representable) float inputs, one rounding at the end
    fx = [Fraction(t) for t in xs]
    fu = [Fraction(v) for v in us]

    def u_at(t: Fraction) -> Fraction:
        i = bisect.bisect_right(fx, t) - 1
        if i < 0 or i >= len(fx) - 1:
            return fu[-1] if t == fx[-1] else Fraction(0)
        return fu[i] + (fu[i + 1] - fu[i]) * (t - fx[i]) / (fx[i + 1] - fx[i])

    def sq_integral(a: Fraction, b: Fraction) -> Fraction:
        ua, ub = u_at(a), u_at(b)
        return (b - a) * (ua * ua + ua * ub + ub * ub) / 3

    segs = list(zip(fx, fx[1:], fu, fu[1:]))
    l2 = sum(((b - a) * (ua * ua + ua * ub + ub * ub) / 3 for a, b, ua, ub in segs), Fraction(0))
    h1 = sum(((ub - ua) ** 2 / (b - a) for a, b, ua, ub in segs), Fraction(0))

    atoms, pieces = mu.window(xs[0], xs[-1])
    lhs = sum((u_at(Fraction(a.pos)) ** 2 * abs(Fraction(a.weight)) for a in atoms), Fraction(0))
    for d in pieces:
        lo, hi = Fraction(d.lo), Fraction(d.hi)
        cuts = [lo] + [t for t in fx if lo < t < hi] + [hi]
        lhs += abs(Fraction(d.value)) * sum((sq_integral(a, b) for a, b in zip(cuts, cuts[1:])), Fraction(0))
    L, dl = Fraction(loc), Fraction(delta)
    rhs = 4 * dl * L * h1 + (4 * L / dl) * l2
    return FormBoundResult(float(lhs), float(rhs), lhs <= rhs)
