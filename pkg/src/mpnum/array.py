"""The multi-precision container and its elementwise, reduction and shape operations.

An :class:`MPArray` is a vector or a column-major matrix whose elements are
stored in half, single or double precision.  Indexing is 0-based.
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from . import _backend
from .dispatch import execute, register, resolve
from .errors import EmptyArray, IndexOutOfRange, InvalidParam, NotAMatrix, ShapeMismatch
from .precision import (
    Placement,
    Precision,
    decode_f16,
    encode_f16,
    parse_placement,
    parse_precision,
    round_array,
    round_to_precision,
)

__all__ = [
    "MPArray",
    "create",
    "from_doubles",
    "from_numpy",
    "to_doubles",
    "to_matrix",
    "get",
    "set",
    "ew_binary",
    "ew_scalar",
    "ew_unary",
    "reduce",
    "diag",
    "diag_from",
    "concat",
    "rbind",
    "cbind",
    "transpose",
    "format",
]

Scalar = Union[int, float]


class MPArray:
    """Vector or column-major matrix stored at a fixed precision.

    Half elements are held as raw binary16 patterns (``uint16``); single and
    double elements are native.  ``placement`` is a device tag: GPU-tagged
    arrays can be built and printed but kernels refuse to run on them.
    """

    __slots__ = ("_data", "precision", "placement")

    def __init__(self, data, precision=Precision.DOUBLE, placement=Placement.CPU):
        precision = parse_precision(precision)
        data = np.asarray(data)
        if data.ndim not in (1, 2):
            raise ShapeMismatch("MPArray data must be 1-D (vector) or 2-D (matrix)")
        if data.dtype != precision.storage_dtype:
            raise TypeError(f"{precision.label} storage must be {precision.storage_dtype}, got {data.dtype}")
        if data.ndim == 2:
            data = np.asfortranarray(data)
        self._data = data
        self.precision = precision
        self.placement = parse_placement(placement)

    @classmethod
    def _from_storage(cls, data, precision, placement=Placement.CPU):
        obj = cls.__new__(cls)
        obj._data = np.asfortranarray(data) if data.ndim == 2 else data
        obj.precision = precision
        obj.placement = placement
        return obj

    # -- shape ---------------------------------------------------------------
    @property
    def shape(self):
        return self._data.shape

    @property
    def is_matrix(self) -> bool:
        return self._data.ndim == 2

    @property
    def nrow(self) -> int:
        return self._data.shape[0]

    @property
    def ncol(self) -> int:
        return self._data.shape[1] if self.is_matrix else 1

    @property
    def size(self) -> int:
        return self._data.size

    def __len__(self):
        return self.size

    def to_matrix(self, rows: int, cols: int) -> "MPArray":
        """Reinterpret the column-major buffer as a ``rows`` x ``cols`` matrix, in place."""
        if rows < 0 or cols < 0 or rows * cols != self.size:
            raise ShapeMismatch(f"cannot view {self.size} elements as {rows}x{cols}")
        flat = self._data.ravel(order="F")
        self._data = flat.reshape((rows, cols), order="F")
        return self

    def to_vector(self) -> "MPArray":
        self._data = self._data.ravel(order="F").copy()
        return self

    # -- element access ------------------------------------------------------
    def _flat_index(self, i, j=None):
        if j is None:
            if not -self.size <= i < self.size or i < 0:
                raise IndexOutOfRange(f"index {i} out of range for size {self.size}")
            return i
        if not self.is_matrix:
            raise NotAMatrix("two indices given for a vector")
        r, c = self.shape
        if not (0 <= i < r and 0 <= j < c):
            raise IndexOutOfRange(f"index ({i}, {j}) out of range for {r}x{c} matrix")
        return i + j * r

    def get(self, i: int, j: Optional[int] = None) -> float:
        k = self._flat_index(i, j)
        raw = self._data.ravel(order="F")[k] if self.is_matrix else self._data[k]
        if self.precision is Precision.HALF:
            return decode_f16(int(raw))
        return float(raw)

    def set(self, i: int, j, v: Optional[Scalar] = None) -> None:
        """``set(i, v)`` for linear access or ``set(i, j, v)`` for matrices."""
        if v is None:
            i, j, v = i, None, j
        k = self._flat_index(i, j)
        if self.precision is Precision.HALF:
            stored = np.uint16(encode_f16(float(v)))
        else:
            stored = self.precision.storage_dtype.type(round_to_precision(float(v), self.precision))
        if self.is_matrix:
            r = self.nrow
            self._data[k % r, k // r] = stored
        else:
            self._data[k] = stored

    def __getitem__(self, idx):
        if isinstance(idx, tuple):
            return self.get(*idx)
        return self.get(idx)

    def __setitem__(self, idx, value):
        if isinstance(idx, tuple):
            self.set(idx[0], idx[1], value)
        else:
            self.set(idx, value)

    # -- conversion ----------------------------------------------------------
    def to_doubles(self) -> np.ndarray:
        """Exact float64 copy of all elements in column-major order."""
        flat = self._data.ravel(order="F")
        if self.precision is Precision.HALF:
            from .precision import DECODE_TABLE

            return DECODE_TABLE[flat]
        return flat.astype(np.float64)

    def to_numpy(self) -> np.ndarray:
        """Exact float64 array with the same shape (vector -> 1-D)."""
        flat = self.to_doubles()
        if self.is_matrix:
            return flat.reshape(self.shape, order="F")
        return flat

    def copy(self) -> "MPArray":
        return MPArray._from_storage(self._data.copy(order="F"), self.precision, self.placement)

    def astype(self, precision) -> "MPArray":
        """Copy converted to ``precision`` (rounded when narrowing)."""
        p = parse_precision(precision)
        if p is self.precision:
            return self.copy()
        data = round_array(self.to_numpy(), p)
        return MPArray._from_storage(data, p, self.placement)

    def as_column(self) -> "MPArray":
        """Matrix view of a vector as ``n x 1`` (copy of the shape, shared data)."""
        if self.is_matrix:
            return self
        return MPArray._from_storage(self._data.reshape((-1, 1), order="F"), self.precision, self.placement)

    # -- operators -----------------------------------------------------------
    def __add__(self, other):
        return _binary_or_scalar("add", self, other)

    def __radd__(self, other):
        return _binary_or_scalar("add", self, other)

    def __sub__(self, other):
        return _binary_or_scalar("sub", self, other)

    def __rsub__(self, other):
        return ew_scalar("sub", self, other, reverse=True)

    def __mul__(self, other):
        return _binary_or_scalar("mul", self, other)

    def __rmul__(self, other):
        return _binary_or_scalar("mul", self, other)

    def __truediv__(self, other):
        return _binary_or_scalar("div", self, other)

    def __rtruediv__(self, other):
        return ew_scalar("div", self, other, reverse=True)

    def __neg__(self):
        return ew_scalar("mul", self, -1.0)

    def __matmul__(self, other):
        from .linalg import matmul

        return matmul(self, other)

    @property
    def T(self) -> "MPArray":
        return transpose(self)

    def format(self) -> str:
        return format(self)

    def __repr__(self):
        return _header(self)

    def __str__(self):
        return format(self)


def _binary_or_scalar(op, a, other):
    if isinstance(other, MPArray):
        return ew_binary(op, a, other)
    if isinstance(other, (int, float, np.floating, np.integer)):
        return ew_scalar(op, a, float(other))
    return NotImplemented


# ---------------------------------------------------------------------------
# construction


def create(size: int, precision=Precision.DOUBLE, placement=Placement.CPU) -> MPArray:
    """Zero vector of ``size`` elements."""
    if int(size) < 1:
        raise ShapeMismatch("size must be >= 1")
    p = parse_precision(precision)
    return MPArray._from_storage(np.zeros(int(size), dtype=p.storage_dtype), p, parse_placement(placement))


def from_doubles(
    values: Sequence[float],
    rows: Optional[int] = None,
    cols: Optional[int] = None,
    precision=Precision.DOUBLE,
    placement=Placement.CPU,
) -> MPArray:
    """Build from column-major values, rounding each element to ``precision``.

    Without ``rows``/``cols`` a vector is returned.
    """
    p = parse_precision(precision)
    vals = np.asarray(values, dtype=np.float64).ravel(order="F")
    data = round_array(vals, p)
    if rows is None and cols is None:
        return MPArray._from_storage(data, p, parse_placement(placement))
    if rows is None:
        rows = vals.size // cols if cols else 0
    if cols is None:
        cols = vals.size // rows if rows else 0
    if rows * cols != vals.size:
        raise ShapeMismatch(f"{vals.size} values cannot fill a {rows}x{cols} matrix")
    return MPArray._from_storage(data.reshape((rows, cols), order="F"), p, parse_placement(placement))


def from_numpy(arr, precision=Precision.DOUBLE, placement=Placement.CPU) -> MPArray:
    """Build from a numpy array, keeping its shape (1-D -> vector, 2-D -> matrix)."""
    p = parse_precision(precision)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise ShapeMismatch("expected a 1-D or 2-D array")
    data = round_array(np.asfortranarray(arr) if arr.ndim == 2 else arr, p)
    return MPArray._from_storage(data, p, parse_placement(placement))


def to_doubles(a: MPArray) -> np.ndarray:
    return a.to_doubles()


def to_matrix(a: MPArray, rows: int, cols: int) -> MPArray:
    return a.to_matrix(rows, cols)


def get(a: MPArray, i: int, j: Optional[int] = None) -> float:
    return a.get(i, j)


def set(a: MPArray, i: int, j, v=None) -> None:  # noqa: A001 - mirrors get/set pair
    a.set(i, j, v)


# ---------------------------------------------------------------------------
# elementwise arithmetic

_BINARY = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.true_divide,
}


def _ew_kernel(ufunc):
    def kernel(x, y):
        with np.errstate(all="ignore"):
            return ufunc(x, y)

    return kernel


def _ew_scalar_kernel(ufunc):
    def kernel(x, s, reverse=False):
        s = x.dtype.type(s)
        with np.errstate(all="ignore"):
            return ufunc(s, x) if reverse else ufunc(x, s)

    return kernel


for _name, _uf in _BINARY.items():
    register(_name, arity=2)(_ew_kernel(_uf))
    register(f"{_name}_scalar", arity=1)(_ew_scalar_kernel(_uf))


def ew_binary(op: str, a: MPArray, b: MPArray) -> MPArray:
    """Elementwise ``a op b`` in the promoted precision (shapes must match)."""
    if op not in _BINARY:
        raise InvalidParam(f"unknown elementwise operation {op!r}")
    if a.shape != b.shape:
        raise ShapeMismatch(f"{op}: shapes {a.shape} and {b.shape} differ")
    key = resolve(op, a.precision, b.precision)
    out = execute(key, op, a, b)
    out.placement = a.placement
    return out


def ew_scalar(op: str, a: MPArray, s: float, reverse: bool = False) -> MPArray:
    """Elementwise ``a op s`` (or ``s op a``) keeping ``a``'s precision."""
    if op not in _BINARY:
        raise InvalidParam(f"unknown elementwise operation {op!r}")
    name = f"{op}_scalar"
    key = resolve(name, a.precision)
    return execute(key, name, a, float(s), reverse=reverse)


def _round_digits(x, digits=0):
    with np.errstate(all="ignore"):
        return np.round(x, int(digits))


_UNARY = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

for _name, _uf in _UNARY.items():

    def _make(uf):
        def kernel(x):
            with np.errstate(all="ignore"):
                return uf(x)

        return kernel

    register(_name, arity=1)(_make(_uf))
register("round", arity=1)(_round_digits)


def ew_unary(op: str, a: MPArray, digits: int = 0) -> MPArray:
    """Elementwise log/exp/sqrt/abs/round in ``a``'s precision."""
    if op == "round":
        return execute(resolve("round", a.precision), "round", a, digits=digits)
    if op not in _UNARY:
        raise InvalidParam(f"unknown unary operation {op!r}")
    return execute(resolve(op, a.precision), op, a)


# ---------------------------------------------------------------------------
# reductions (always accumulated in double, column-major, left to right)


@register("sum", arity=1, mode="double")
def _sum_kernel(x):
    return _backend.kernels().seq_sum(x.ravel(order="F"))


@register("square_sum", arity=1, mode="double")
def _square_sum_kernel(x):
    flat = x.ravel(order="F")
    return _backend.kernels().seq_sum(flat * flat)


@register("mean", arity=1, mode="double")
def _mean_kernel(x):
    return _backend.kernels().seq_sum(x.ravel(order="F")) / x.size


@register("min", arity=1, mode="double")
def _min_kernel(x):
    return float(np.min(x))


@register("max", arity=1, mode="double")
def _max_kernel(x):
    return float(np.max(x))


_REDUCTIONS = ("sum", "square_sum", "min", "max", "mean")


def reduce(op: str, a: MPArray) -> float:
    if op not in _REDUCTIONS:
        raise InvalidParam(f"unknown reduction {op!r}")
    if a.size == 0:
        raise EmptyArray(f"{op} of an empty array")
    return execute(resolve(op, a.precision), op, a)


# ---------------------------------------------------------------------------
# shape operations (exact; values are only moved or widened)


@register("diag", arity=1, mode="storage")
def _diag_kernel(x):
    return np.diagonal(x).copy()


@register("diag_from", arity=1, mode="storage")
def _diag_from_kernel(v, n):
    out = np.zeros((n, n), dtype=v.dtype, order="F")
    out[np.arange(n), np.arange(n)] = v
    return out


@register("transpose", arity=1, mode="storage")
def _transpose_kernel(x):
    return np.asfortranarray(x.T)


@register("rbind", arity=2, mode="storage")
def _rbind_kernel(x, y):
    return np.concatenate([x, y], axis=0)


@register("cbind", arity=2, mode="storage")
def _cbind_kernel(x, y):
    return np.concatenate([x, y], axis=1)


def diag(a: MPArray) -> MPArray:
    """Main diagonal of a matrix (``min(rows, cols)`` entries)."""
    if not a.is_matrix:
        raise NotAMatrix("diag expects a matrix; use diag_from to build one")
    return execute(resolve("diag", a.precision), "diag", a)


def diag_from(v: MPArray, n: Optional[int] = None) -> MPArray:
    """``n x n`` matrix with ``v`` on the diagonal and zeros elsewhere."""
    if n is None:
        n = v.size
    if v.size != n:
        raise ShapeMismatch(f"diagonal of length {v.size} does not fit a {n}x{n} matrix")
    flat = MPArray._from_storage(v._data.ravel(order="F"), v.precision, v.placement)
    return execute(resolve("diag_from", v.precision), "diag_from", flat, n=n)


def transpose(a: MPArray) -> MPArray:
    """Matrix transpose; a vector is treated as a column and becomes ``1 x n``."""
    return execute(resolve("transpose", a.precision), "transpose", a.as_column())


def concat(axis: str, a: MPArray, b: MPArray) -> MPArray:
    """Bind two matrices along ``axis`` ("rows" or "cols") in the promoted precision."""
    if axis not in ("rows", "cols"):
        raise InvalidParam("axis must be 'rows' or 'cols'")
    a2, b2 = a.as_column(), b.as_column()
    if axis == "rows":
        if a2.ncol != b2.ncol:
            raise ShapeMismatch(f"rbind: column counts {a2.ncol} and {b2.ncol} differ")
        op = "rbind"
    else:
        if a2.nrow != b2.nrow:
            raise ShapeMismatch(f"cbind: row counts {a2.nrow} and {b2.nrow} differ")
        op = "cbind"
    return execute(resolve(op, a.precision, b.precision), op, a2, b2)


def rbind(a: MPArray, b: MPArray) -> MPArray:
    return concat("rows", a, b)


def cbind(a: MPArray, b: MPArray) -> MPArray:
    return concat("cols", a, b)


# ---------------------------------------------------------------------------
# printing


def _header(a: MPArray) -> str:
    return f"MPCR Object: {a.precision.bits}-Bit Precision on {a.placement.value}"


def _fmt(v: float) -> str:
    return f"{v:.7g}"


def format(a: MPArray) -> str:  # noqa: A001 - public name of the print operation
    """Header line, dimensions and values, laid out like ``PrintValues()``."""
    lines = [_header(a)]
    values = a.to_doubles()
    if not a.is_matrix:
        lines.append(f"Vector Size : {a.size}")
        lines.append("---------------------")
        per_line = 10
        for start in range(0, a.size, per_line):
            chunk = "".join(f"{_fmt(v):>7}" for v in values[start:start + per_line])
            lines.append(f"[ {start + 1} ] {chunk}")
        return "\n".join(lines)
    r, c = a.shape
    lines.append(f"Precision  : {a.precision.bits}-Bit  Precision ")
    lines.append(f"Number of Rows : {r}")
    lines.append(f"Number of Columns : {c}")
    lines.append("---------------------")
    text = [_fmt(v) for v in values]
    width = max([4] + [len(t) for t in text]) + 1
    for i in range(r):
        row = "".join(f"{text[i + j * r]:>{width}}" for j in range(c))
        lines.append(f" [{row}    ]")
    return "\n".join(lines)
