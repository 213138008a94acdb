"""Exact propagation of solutions of -u'' + mu u = E u.

Between breakpoints the density is constant, so ``u'' = (v - E) u`` is solved
by a closed-form 2x2 matrix.  An atom of weight ``w`` at ``x`` makes the
derivative jump, ``u'(x+) - u'(x-) = w u(x)``.  States always carry the right
limit ``u'(x+)``; consequently a rightward run applies the atoms in
``(x0, x1]`` and a leftward run applies (inverted) the atoms in ``(x1, x0]``.
This is the only choice for which the transfer matrix maps
``(u(0), u'(0+))`` to ``(u(x), u'(x+))`` for every sign of ``x`` and for which
runs compose.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .measures import Measure

LINEAR_THRESHOLD = 1e-14
DEFAULT_MAX_SPAN = 1e4
MAX_SPAN_ENV = "MEASURE_SCHROED_MAX_SPAN"


class PropagationError(RuntimeError):
    """A computation guard tripped (span limit or floating overflow)."""


class SpanGuardError(PropagationError):
    pass


class OverflowGuardError(PropagationError):
    def __init__(self, x: float):
        super().__init__(f"overflow at x={x!r}")
        self.x = x


@dataclass(frozen=True)
class State:
    """Solution data at ``x``: value ``u`` and right derivative ``du = u'(x+)``."""

    x: float
    u: float
    du: float

    @property
    def norm(self) -> float:
        return math.hypot(self.u, self.du)


@dataclass(frozen=True)
class TransferMatrix:
    m11: float
    m12: float
    m21: float
    m22: float

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        a, b, c, d = _mul((self.m11, self.m12, self.m21, self.m22),
                          (other.m11, other.m12, other.m21, other.m22))
        return TransferMatrix(a, b, c, d)

    def __pow__(self, n: int) -> "TransferMatrix":
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = TransferMatrix(1.0, 0.0, 0.0, 1.0)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def apply(self, u: float, du: float) -> tuple[float, float]:
        return self.m11 * u + self.m12 * du, self.m21 * u + self.m22 * du

    def as_list(self) -> list[list[float]]:
        return [[self.m11, self.m12], [self.m21, self.m22]]

    def to_dict(self) -> dict:
        return {"m11": self.m11, "m12": self.m12, "m21": self.m21, "m22": self.m22, "det": self.det}


def _mul(a, b):
    return (a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3])


def free_matrix(length: float, c: float) -> tuple[float, float, float, float]:
    """Entries of the flow of ``u'' = c u`` over ``length`` (may be negative)."""
    s = length
    if abs(c) < LINEAR_THRESHOLD:
        return 1.0, s, 0.0, 1.0
    if c < 0:
        k = math.sqrt(-c)
        cs, sn = math.cos(k * s), math.sin(k * s)
        return cs, sn / k, -k * sn, cs
    k = math.sqrt(c)
    try:
        ch, sh = math.cosh(k * s), math.sinh(k * s)
    except OverflowError:
        # leave it to the caller's finiteness guard
        ch, sh = math.inf, math.copysign(math.inf, s)
    return ch, sh / k, k * sh, ch


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite input {v!r}")


def propagate_free(s: State, length: float, c: float) -> State:
    """Advance ``s`` by ``length`` through constant density with ``c = density - E``."""
    _check_finite(s.x, s.u, s.du, length, c)
    a, b, cc, d = free_matrix(length, c)
    return State(s.x + length, a * s.u + b * s.du, cc * s.u + d * s.du)


def apply_atom(s: State, weight: float, direction: int = 1) -> State:
    """Derivative jump across an atom at ``s.x``.

    ``direction=1`` turns ``u'(x-)`` into ``u'(x+)``; ``direction=-1`` undoes it
    (used when crossing the atom leftward).
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    return State(s.x, s.u, s.du + direction * weight * s.u)


def max_span() -> float:
    raw = os.environ.get(MAX_SPAN_ENV)
    if raw is None:
        return DEFAULT_MAX_SPAN
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{MAX_SPAN_ENV} must be a number, got {raw!r}") from None
    if not value > 0:
        raise ValueError(f"{MAX_SPAN_ENV} must be positive")
    return value


def _flow(mu: Measure, E: float, x0: float, x1: float, extra_stops: Iterable[float] = (),
          span_limit: Optional[float] = None):
    """Yield ``(x, T)`` at every stop from ``x0`` to ``x1``.

    ``T`` is the accumulated matrix from ``x0`` to the right-limit data at ``x``.
    The first yield is ``(x0, identity)``.
    """
    _check_finite(E, x0, x1)
    limit = max_span() if span_limit is None else span_limit
    if abs(x1 - x0) > limit:
        raise SpanGuardError(f"span {abs(x1 - x0)!r} exceeds max span {limit!r}")
    T = (1.0, 0.0, 0.0, 1.0)
    yield x0, T
    if x1 == x0:
        return
    lo, hi = (x0, x1) if x1 > x0 else (x1, x0)
    atoms, pieces = mu.window(lo, hi)
    weights = {a.pos: a.weight for a in atoms}
    stops = {lo, hi}
    stops.update(weights)
    for d in pieces:
        stops.add(d.lo)
        stops.add(d.hi)
    stops = sorted(stops)
    # sample points branch off the running product, so the trajectory is the
    # same bit for bit whatever else is sampled
    samples = sorted({x for x in extra_stops if lo < x < hi} - set(stops))

    # density on each gap between consecutive stops
    dens = []
    j = 0
    for a, b in zip(stops, stops[1:]):
        while j < len(pieces) and pieces[j].hi <= a:
            j += 1
        if j < len(pieces) and pieces[j].lo <= a and b <= pieces[j].hi:
            dens.append(pieces[j].value)
        else:
            dens.append(0.0)

    def branch(t, start, c, T):
        out = _mul(free_matrix(t - start, c), T)
        if not all(map(math.isfinite, out)):
            raise OverflowGuardError(t)
        return out

    if x1 > x0:
        k = 0
        for i in range(len(stops) - 1):
            a, b = stops[i], stops[i + 1]
            c = dens[i] - E
            while k < len(samples) and samples[k] < b:
                yield samples[k], branch(samples[k], a, c, T)
                k += 1
            T = _mul(free_matrix(b - a, c), T)
            w = weights.get(b)
            if w is not None:
                T = (T[0], T[1], T[2] + w * T[0], T[3] + w * T[1])
            if not all(map(math.isfinite, T)):
                raise OverflowGuardError(b)
            yield b, T
    else:
        k = len(samples) - 1
        w = weights.get(x0)
        if w is not None:
            T = (T[0], T[1], T[2] - w * T[0], T[3] - w * T[1])
        for i in range(len(stops) - 2, -1, -1):
            a, b = stops[i], stops[i + 1]
            c = dens[i] - E
            while k >= 0 and samples[k] > a:
                yield samples[k], branch(samples[k], b, c, T)
                k -= 1
            T = _mul(free_matrix(a - b, c), T)
            if not all(map(math.isfinite, T)):
                raise OverflowGuardError(a)
            yield a, T
            w = weights.get(a)
            if w is not None and a != x1:
                T = (T[0], T[1], T[2] - w * T[0], T[3] - w * T[1])


def solve_ivp(mu: Measure, E: float, x_target: float, init: State, *, trajectory: bool = False,
              samples: Sequence[float] = (), span_limit: Optional[float] = None):
    """Propagate ``init`` to ``x_target``.

    Returns the final :class:`State`, or ``(final, states)`` with ``trajectory=True``
    where ``states`` holds the data at every breakpoint (and at ``samples``),
    ordered by ``x``.
    """
    _check_finite(init.u, init.du)
    final = None
    states = []
    for x, T in _flow(mu, E, init.x, x_target, samples, span_limit):
        if trajectory or x == x_target:
            u = T[0] * init.u + T[1] * init.du
            du = T[2] * init.u + T[3] * init.du
            st = State(x, u, du)
            if trajectory:
                states.append(st)
            final = st
    if not trajectory:
        return final
    states.sort(key=lambda s: s.x)
    return final, states


def states_at(mu: Measure, E: float, xs: Sequence[float], init: State, *,
              span_limit: Optional[float] = None) -> list[State]:
    """Solution data at each of ``xs``, computed by two sweeps out from ``init.x``."""
    found: dict[float, State] = {init.x: init}
    right = [x for x in xs if x > init.x]
    left = [x for x in xs if x < init.x]
    for targets in (right, left):
        if not targets:
            continue
        end = max(targets) if targets is right else min(targets)
        wanted = set(targets)
        for x, T in _flow(mu, E, init.x, end, targets, span_limit):
            if x in wanted:
                found[x] = State(x, T[0] * init.u + T[1] * init.du, T[2] * init.u + T[3] * init.du)
    return [found[x] for x in xs]


def transfer_matrix(mu: Measure, E: float, x: float, *, x0: float = 0.0,
                    span_limit: Optional[float] = None) -> TransferMatrix:
    """Matrix sending ``(u(x0), u'(x0+))`` to ``(u(x), u'(x+))``.

    Its columns are the solutions with data (1, 0) and (0, 1) at ``x0``.
    """
    T = (1.0, 0.0, 0.0, 1.0)
    for _, T in _flow(mu, E, x0, x, (), span_limit):
        pass
    return TransferMatrix(*T)


def wronskian(f: State, g: State) -> float:
    """``f(x) g'(x+) - f'(x+) g(x)``."""
    if f.x != g.x:
        raise ValueError(f"states at different positions: {f.x!r} vs {g.x!r}")
    return f.u * g.du - f.du * g.u


def monodromy(mu: Measure, E: float, *, period: Optional[float] = None) -> TransferMatrix:
    """Transfer matrix over one period ``[0, p]``; its trace is the Floquet discriminant.

    ``period`` may override the measure's own period with a multiple of it.
    """
    p = mu.period if period is None else period
    if p is None:
        if mu.is_zero:
            raise ValueError("zero measure has no intrinsic period; pass period=")
        raise ValueError("monodromy needs a periodic measure")
    return transfer_matrix(mu, E, p)


def floquet_exponent(M: TransferMatrix, period: float) -> float:
    """log of the spectral radius of ``M`` per unit length (0 inside bands)."""
    t = M.trace
    if abs(t) <= 2:
        return 0.0
    rho = (abs(t) + math.sqrt(t * t - 4)) / 2
    return math.log(rho) / period
