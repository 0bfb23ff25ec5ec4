"""mpnum: multi-precision (half/single/double) dense linear algebra.

Arrays carry a precision tag; mixed-precision operations promote to the
wider format, and every kernel is dispatched on the input precisions.
"""

from . import errors
from ._backend import available as available_backends
from ._backend import backend_name, get_num_threads, set_num_threads, use_backend
from .array import (
    MPArray,
    cbind,
    concat,
    create,
    diag,
    diag_from,
    ew_binary,
    ew_scalar,
    ew_unary,
    format,
    from_doubles,
    from_numpy,
    get,
    rbind,
    reduce,
    set,
    to_doubles,
    to_matrix,
    transpose,
)
from .dispatch import REGISTRY, KernelKey, execute, resolve
from .errors import *  # noqa: F401,F403
from .linalg import (
    SvdResult,
    backsolve,
    chol,
    chol2inv,
    crossprod,
    forwardsolve,
    gemm,
    matmul,
    solve,
    svd,
    trsm,
)
from .precision import (
    Placement,
    Precision,
    decode_f16,
    encode_f16,
    promote,
    round_to_precision,
)

__version__ = "0.1.0"

REGISTRY.freeze()
