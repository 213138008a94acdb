"""Example measures: delta combs and quasi-periodic sums with their periodic approximants."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath

from . import diophantine
from .gordon import ApproximationFamily
from .measures import Atom, Interval, Measure, difference_tv, scale_pushforward, translate


def delta_comb(period: float, offset: float, weight: float) -> Measure:
    """``sum_n weight * delta_{offset + n * period}``."""
    if not period > 0:
        raise ValueError("period must be positive")
    return Measure([Atom(float(offset), float(weight))], period=float(period))


def _require_one_periodic(mu: Measure, name: str) -> None:
    if mu.is_zero:
        return
    p = mu.period
    if p is None or abs(1.0 / p - round(1.0 / p)) > 1e-12 or round(1.0 / p) < 1:
        raise ValueError(f"{name} must be 1-periodic (got period {p})")


def quasi_periodic_pair(nu_tilde: Measure, nu: Measure, alpha, m_max: int, *,
                        dps: int = diophantine.DEFAULT_DPS) -> tuple[Measure, ApproximationFamily]:
    """``mu = nu_tilde + nu o alpha`` with approximants ``nu_tilde + nu o (p_m/q_m)``.

    The m-th approximant is ``q_m``-periodic; the family's convergents are
    stored alongside.  ``mu`` itself is exact on all of R (its two parts
    are kept separate), so no truncation window is needed.
    """
    _require_one_periodic(nu_tilde, "nu_tilde")
    _require_one_periodic(nu, "nu")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    cf = diophantine.cf_expansion(alpha, m_max, dps=dps)
    if len(cf.partial_quotients) < m_max:
        raise ValueError(f"alpha is rational at working precision (expansion stops after "
                         f"{len(cf.partial_quotients)} terms)")
    convs = diophantine.convergents(cf)
    mu = nu_tilde + scale_pushforward(nu, float(cf.alpha))
    approximants = []
    periods = []
    for c in convs:
        approximants.append(nu_tilde + scale_pushforward(nu, Fraction(c.p, c.q)))
        periods.append(float(c.q))
    fam = ApproximationFamily(mu, approximants, periods, tuple(convs))
    return mu, fam


def example_bound_log10(p: int, q: int, m: int, B: float, gamma: float) -> float:
    """log10 of ``3 p (2 q B)^gamma m^{-q gamma}``."""
    if B <= 0:
        return -math.inf
    return math.log10(3 * p) + gamma * math.log10(2 * q * B) - q * gamma * math.log10(m)


class HolderSample(NamedTuple):
    x: float
    lhs: float
    rhs: float
    ok: bool


def holder_modulus_check(nu: Measure, gamma: float, x_samples: Sequence[float]) -> list[HolderSample]:
    """Check ``|nu(. - x) - nu|([0, 1]) <= |x|^gamma`` at each sample shift.

    Any atom of ``nu`` breaks this for small shifts, so a useful ``nu`` is density only.
    """
    _require_one_periodic(nu, "nu")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    out = []
    unit = Interval(0.0, 1.0)
    for x in x_samples:
        lhs = difference_tv(translate(nu, x), nu, unit)
        rhs = abs(x) ** gamma
        out.append(HolderSample(float(x), lhs, rhs, lhs <= rhs))
    return out


def jump_variation(nu: Measure) -> float:
    """Total jump of the periodic density over one period (wrap-around jump included)."""
    p = nu.period
    if p is None:
        raise ValueError("needs a periodic measure")
    _, pieces = nu.window(0.0, p)
    # sample density just right of each breakpoint in [0, p)
    cuts = sorted({0.0} | {d.lo for d in pieces} | {d.hi for d in pieces if d.hi < p})

    def value_at(t: float) -> float:
        for d in pieces:
            if d.lo <= t < d.hi:
                return d.value
        return 0.0

    vals = [value_at(t) for t in cuts]
    return math.fsum(abs(b - a) for a, b in zip(vals, vals[1:] + vals[:1]))
