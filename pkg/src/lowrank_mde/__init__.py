"""Low-rank integration of massive matrix differential equations.

The production path advances a rank-r factorization U diag(sigma) Y.T by
sampling the time-discrete update at greedily selected rows and columns
and rebuilding the factorization from those samples alone.  Baseline
factor-evolution integrators, a dense reference solver, and three
benchmark problems are included, along with the experiment harness that
drives them.
"""

__version__ = "0.1.0"

from .errors import (
    BaselineSingular,
    ConfigError,
    DegenerateBasis,
    IllConditionedSamples,
    InvalidTruncation,
    LowRankMdeError,
    ModelBlowup,
    SingularCore,
    TooManySamples,
    ZeroReference,
    ZeroState,
)
from .integrators import (
    FomTrajectory,
    MdeModel,
    RankPolicy,
    StepDiagnostics,
    dlra_step,
    do_step,
    fom_solve,
    initial_state,
    relative_error,
    tdb_cur_step,
)
from .kernels import lstsq, matrix_exponential, norm2_of_pinv, qr_economy, svd_economy
from .lowrank import (
    CurDiagnostics,
    LowRankState,
    assemble_cols,
    assemble_rows,
    cur_from_samples,
    cur_reference,
    error_proxy,
    projection_error_bound,
    read_checkpoint,
    truncate,
    write_checkpoint,
)
from .sampling import AdjacencyMap, IndexVector, deim, find_adjacent, oversample, qdeim
from .schemes import SchemeSpec, scheme

__all__ = [
    "AdjacencyMap",
    "BaselineSingular",
    "ConfigError",
    "CurDiagnostics",
    "DegenerateBasis",
    "FomTrajectory",
    "IllConditionedSamples",
    "IndexVector",
    "InvalidTruncation",
    "LowRankMdeError",
    "LowRankState",
    "MdeModel",
    "ModelBlowup",
    "RankPolicy",
    "SchemeSpec",
    "SingularCore",
    "StepDiagnostics",
    "TooManySamples",
    "ZeroReference",
    "ZeroState",
    "assemble_cols",
    "assemble_rows",
    "cur_from_samples",
    "cur_reference",
    "deim",
    "dlra_step",
    "do_step",
    "error_proxy",
    "find_adjacent",
    "fom_solve",
    "initial_state",
    "lstsq",
    "matrix_exponential",
    "norm2_of_pinv",
    "oversample",
    "projection_error_bound",
    "qdeim",
    "qr_economy",
    "read_checkpoint",
    "relative_error",
    "scheme",
    "svd_economy",
    "tdb_cur_step",
    "truncate",
    "write_checkpoint",
]
