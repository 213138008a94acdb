"""One-dimensional Schrodinger operators -d^2/dx^2 + mu with signed measure potentials."""

from .measures import (
    Atom,
    DensityPiece,
    Interval,
    Measure,
    add,
    difference_tv,
    dirac,
    lebesgue,
    loc_norm,
    scale_pushforward,
    total_variation,
    translate,
    zero,
)
from .propagation import (
    State,
    TransferMatrix,
    apply_atom,
    monodromy,
    propagate_free,
    solve_ivp,
    states_at,
    transfer_matrix,
    wronskian,
)

__version__ = "0.1.0"
