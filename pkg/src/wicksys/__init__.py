"""Linear state-space systems over the ring of Hermite-transformed Wick series."""

from wicksys.analysis import (
    Certificate,
    Property,
    Verdict,
    controllability_certificate,
    kalman_rank_at_zero,
    minimality_certificate,
    observability_certificate,
    r_controllability_certificate,
)
from wicksys.errors import (
    CompositionDomain,
    DimensionMismatch,
    DivergentConstant,
    DivergentWeightSum,
    InvalidRecursion,
    NotInvertible,
    ResourceLimit,
    SingularAtPoint,
    SpecMismatch,
    WickSysError,
)
from wicksys.multiindex import MultiIndex, TruncationSpec, enumerate_indices, factorial, weight2n
from wicksys.ring import (
    RingElement,
    compose,
    evaluate,
    growth_bound_check,
    inverse,
    kq_membership,
    norm_k,
    vage_constant,
    wick_mul,
)
from wicksys.ringmatrix import RingMatrix, apply_poly, char_poly, det, mat_inverse, mat_mul
from wicksys.statespace import (
    StateSpaceSystem,
    TransferSeries,
    markov,
    r0_shift,
    realize_cascade,
    realize_concat_cols,
    realize_concat_rows,
    realize_from_recursion,
    realize_inverse,
    realize_sum,
    simulate,
    tf_eval,
    tf_series_eval,
)

__version__ = "0.1.0"
