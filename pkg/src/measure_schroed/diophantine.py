"""Continued fractions, convergents and the Liouville-type approximation test.

Reals are handled as :mod:`mpmath` numbers at a working precision of
``DEFAULT_DPS`` decimal digits; convergents are exact Python integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

import mpmath

DEFAULT_DPS = 60

Real = Union[float, int, str, Fraction, mpmath.mpf]


@dataclass(frozen=True)
class ContinuedFraction:
    alpha: mpmath.mpf
    partial_quotients: tuple
    rational: bool = False  # expansion terminated: alpha is rational at working precision

    def __post_init__(self):
        if any(int(a) < 1 for a in self.partial_quotients):
            raise ValueError("partial quotients must be positive integers")


@dataclass(frozen=True)
class Convergent:
    m: int
    p: int
    q: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)


class LiouvilleRow(NamedTuple):
    m: int
    lhs: mpmath.mpf
    rhs: mpmath.mpf
    log10_lhs: float
    log10_rhs: float
    satisfied: bool


def to_mpf(alpha: Real) -> mpmath.mpf:
    if isinstance(alpha, Fraction):
        return mpmath.mpf(alpha.numerator) / alpha.denominator
    return mpmath.mpf(alpha)


def named_constant(name: str, *, dps: int = DEFAULT_DPS) -> mpmath.mpf:
    """A few irrationals by name (``golden``, ``sqrt2-1``); else parse a decimal string.

    Evaluated at ``dps`` digits, whatever the ambient mpmath precision.
    """
    table = {
        "golden": lambda: (mpmath.sqrt(5) - 1) / 2,
        "sqrt2-1": lambda: mpmath.sqrt(2) - 1,
        "e-2": lambda: mpmath.e - 2,
        "pi-3": lambda: mpmath.pi - 3,
    }
    key = name.strip().lower()
    with mpmath.workdps(dps):
        if key in table:
            return table[key]()
        try:
            return mpmath.mpf(key)
        except (ValueError, TypeError):
            raise ValueError(f"cannot parse alpha {name!r}") from None


def cf_expansion(alpha: Real, n: int, *, dps: int = DEFAULT_DPS) -> ContinuedFraction:
    """First ``n`` partial quotients of ``alpha in (0, 1)`` by floor iteration.

    Stops early with ``rational=True`` once the remainder vanishes at the
    working precision.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    with mpmath.workdps(dps):
        a = to_mpf(alpha)
        if not (0 < a < 1):
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        eps = mpmath.mpf(2) ** (-(mpmath.mp.prec - 8))
        quotients = []
        r = a
        rational = False
        for _ in range(n):
            inv = 1 / r
            ak = int(mpmath.floor(inv))
            frac = inv - ak
            # 1/r within rounding of an integer: the expansion ends here
            if frac < eps * inv or 1 - frac < eps * inv:
                if 1 - frac < eps * inv:
                    ak += 1
                quotients.append(ak)
                rational = True
                break
            quotients.append(ak)
            r = frac
        return ContinuedFraction(+a, tuple(quotients), rational)


def convergents(cf: Union[ContinuedFraction, Sequence[int]]) -> list[Convergent]:
    """Convergents ``p_m / q_m`` for m = 1..n.

    Seeds p_0 = 0, p_1 = 1, q_0 = 1, q_1 = a_1, then
    p_m = a_m p_{m-1} + p_{m-2} and q_m = a_m q_{m-1} + q_{m-2}.
    """
    quotients = cf.partial_quotients if isinstance(cf, ContinuedFraction) else tuple(cf)
    if not quotients:
        return []
    a = [int(x) for x in quotients]
    p_prev, p = 0, 1
    q_prev, q = 1, a[0]
    out = [Convergent(1, p, q)]
    for m in range(2, len(a) + 1):
        am = a[m - 1]
        p_prev, p = p, am * p + p_prev
        q_prev, q = q, am * q + q_prev
        out.append(Convergent(m, p, q))
    return out


def determinant_residues(convs: Sequence[Convergent]) -> list[int]:
    """``p_m q_{m-1} - p_{m-1} q_m - (-1)^{m-1}`` for m >= 1 (all zero in exact arithmetic)."""
    out = []
    prev = Convergent(0, 0, 1)
    for c in convs:
        out.append(c.p * prev.q - prev.p * c.q - (-1) ** (c.m - 1))
        prev = c
    return out


def evaluate_cf(quotients: Sequence[int], tail: Optional[Real] = None, *,
                dps: int = DEFAULT_DPS) -> Union[Fraction, mpmath.mpf]:
    """Backward evaluation of ``1/(a_1 + 1/(a_2 + ... 1/(a_n + tail)))``.

    Exact :class:`Fraction` without ``tail``; an ``mpf`` otherwise.
    """
    if tail is None:
        x = Fraction(0)
        for a in reversed(quotients):
            x = 1 / (a + x)
        return x
    with mpmath.workdps(dps):
        x = to_mpf(tail)
        for a in reversed(quotients):
            x = 1 / (a + x)
        return +x


def _log10(x: mpmath.mpf) -> float:
    return -math.inf if x == 0 else float(mpmath.log10(x))


def liouville_diagnostic(alpha: Real, convs: Sequence[Convergent], B: float, *,
                         classical: bool = False, dps: int = DEFAULT_DPS) -> list[LiouvilleRow]:
    """Compare ``|alpha - p_m/q_m|`` with ``B m^{-q_m}`` (or ``B q_m^{-m}`` if ``classical``).

    Both sides are compared in extended precision, where ``m^{-q_m}`` cannot
    underflow; base-10 logarithms are reported alongside for tables.
    """
    if B < 0:
        raise ValueError("B must be nonnegative")
    rows = []
    with mpmath.workdps(dps):
        a = to_mpf(alpha)
        for c in convs:
            lhs = abs(a - mpmath.mpf(c.p) / c.q)
            base, power = (c.q, c.m) if classical else (c.m, c.q)
            rhs = mpmath.mpf(B) / mpmath.mpf(base) ** power
            rows.append(LiouvilleRow(c.m, +lhs, +rhs, _log10(lhs), _log10(rhs), lhs <= rhs))
    return rows


def _least_constant(alpha: Real, convs: Sequence[Convergent], scale, dps: int) -> float:
    with mpmath.workdps(dps):
        a = to_mpf(alpha)
        best = mpmath.mpf(0)
        for c in convs:
            best = max(best, abs(a - mpmath.mpf(c.p) / c.q) * scale(c))
        # round up so the float still satisfies every inequality
        return math.nextafter(float(best), math.inf) if best > 0 else 0.0


def least_liouville_constant(alpha: Real, convs: Sequence[Convergent], *,
                             dps: int = DEFAULT_DPS) -> float:
    """Smallest ``B`` with ``|alpha - p_m/q_m| <= B m^{-q_m}`` for all given m."""
    return _least_constant(alpha, convs, lambda c: mpmath.mpf(c.m) ** c.q, dps)


def least_classical_constant(alpha: Real, convs: Sequence[Convergent], *,
                             dps: int = DEFAULT_DPS) -> float:
    """Smallest ``B`` with ``|alpha - p_m/q_m| <= B q_m^{-m}`` for all given m."""
    return _least_constant(alpha, convs, lambda c: mpmath.mpf(c.q) ** c.m, dps)


def liouville_quotients(m_max: int, B: float = 1.0) -> list[int]:
    """Partial quotients ``a_1 .. a_{m_max+1}`` of a fast-approximable number.

    ``a_{m+1}`` is chosen so that ``q_{m+1} >= m^{q_m} / (B q_m)``; since
    ``|alpha - p_m/q_m| < 1/(q_m q_{m+1})`` any continuation keeps
    ``|alpha - p_m/q_m| <= B m^{-q_m}`` for m = 1..m_max.
    """
    if m_max < 1 or not B > 0:
        raise ValueError("need m_max >= 1 and B > 0")
    quotients = [1]
    q_prev, q = 1, 1
    for m in range(1, m_max + 1):
        need = Fraction(m ** q, 1) / (Fraction(B) * q * q)
        a_next = max(1, math.ceil(need))
        quotients.append(a_next)
        q_prev, q = q, a_next * q + q_prev
    return quotients


def liouville_alpha(m_max: int, B: float = 1.0, *, dps: int = DEFAULT_DPS) -> tuple[mpmath.mpf, list[int]]:
    """An irrational ``alpha`` meeting the Liouville-type bound for m <= m_max.

    Built by backward evaluation of :func:`liouville_quotients` followed by a
    golden-section tail, so its expansion continues with 1, 1, 1, ...
    """
    quotients = liouville_quotients(m_max, B)
    with mpmath.workdps(dps):
        tail = (mpmath.sqrt(5) - 1) / 2
        return evaluate_cf(quotients, tail, dps=dps), quotients
