"""Precision controller and kernel dispatcher.

Every public operation registers one kernel per input-precision signature.
Resolution picks the output precision (the lattice join of the inputs) and
execution widens each operand exactly to that precision before running the
homogeneous kernel.  Half kernels compute in single and round the result
back to half.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BackendUnavailable, PrecisionMismatch, UnknownOperation
from .precision import (
    DECODE_TABLE,
    DECODE_TABLE32,
    Placement,
    Precision,
    encode_f16_array,
    promote,
)

PRECISIONS = (Precision.HALF, Precision.SINGLE, Precision.DOUBLE)


@dataclass(frozen=True)
class KernelKey:
    in_a: Precision
    in_b: Optional[Precision]
    out: Precision

    def __str__(self):
        ins = self.in_a.label if self.in_b is None else f"{self.in_a.label},{self.in_b.label}"
        return f"({ins})->{self.out.label}"


@dataclass(frozen=True)
class Kernel:
    """Registered implementation for one (operation, signature) pair.

    ``mode`` says what the implementation receives:
      "compute" - operands widened to the output's compute dtype;
      "double"  - operands widened to float64 (reductions);
      "storage" - operands converted exactly to the output's storage dtype.
    """

    op: str
    key: KernelKey
    fn: Callable
    mode: str

    @property
    def compute_dtype(self):
        if self.mode == "double":
            return np.dtype(np.float64)
        if self.mode == "storage":
            return self.key.out.storage_dtype
        return self.key.out.compute_dtype


class KernelRegistry:
    def __init__(self):
        self._table = {}
        self._arity = {}
        self._frozen = False

    def register(self, op, fn, arity=2, mode="compute", widen_out=False):
        """Register ``fn`` for every input signature of ``op``.

        With ``widen_out`` the output precision may also be any precision
        above the join (used by ops that write into a wider target).
        """
        if self._frozen:
            raise RuntimeError("kernel registry is frozen")
        if arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")
        self._arity[op] = arity
        if arity == 1:
            sigs = [(a, None) for a in PRECISIONS]
        else:
            sigs = list(itertools.product(PRECISIONS, repeat=2))
        for a, b in sigs:
            base = a if b is None else promote(a, b)
            outs = [p for p in PRECISIONS if p >= base] if widen_out else [base]
            for out in outs:
                key = KernelKey(a, b, out)
                self._table[(op, key)] = Kernel(op, key, fn, mode)

    def freeze(self):
        self._frozen = True

    def operations(self):
        return sorted(self._arity)

    def arity(self, op):
        try:
            return self._arity[op]
        except KeyError:
            raise UnknownOperation(f"unknown operation {op!r}") from None

    def lookup(self, op, key):
        try:
            return self._table[(op, key)]
        except KeyError:
            if op not in self._arity:
                raise UnknownOperation(f"unknown operation {op!r}") from None
            raise UnknownOperation(f"no kernel for {op!r} with signature {key}") from None

    def keys(self, op):
        return [k for (name, k) in self._table if name == op]


REGISTRY = KernelRegistry()


def register(op, arity=2, mode="compute", widen_out=False):
    """Decorator form of :meth:`KernelRegistry.register` on the global registry."""

    def deco(fn):
        REGISTRY.register(op, fn, arity=arity, mode=mode, widen_out=widen_out)
        return fn

    return deco


def resolve(op_name: str, a: Precision, b: Optional[Precision] = None) -> KernelKey:
    """Signature for ``op_name`` on inputs of precision ``a`` (and ``b``)."""
    arity = REGISTRY.arity(op_name)
    if arity == 1:
        key = KernelKey(a, None, a)
    else:
        if b is None:
            b = a
        key = KernelKey(a, b, promote(a, b))
    REGISTRY.lookup(op_name, key)
    return key


# ---------------------------------------------------------------------------
# exact conversions between storage and compute representations


def widen(data: np.ndarray, src: Precision, dtype) -> np.ndarray:
    """Exactly widen stored values of precision ``src`` to ``dtype``."""
    dtype = np.dtype(dtype)
    if src is Precision.HALF:
        if dtype == np.uint16:
            return data.copy(order="K")
        table = DECODE_TABLE32 if dtype == np.float32 else DECODE_TABLE
        out = table[data]
    else:
        if dtype.itemsize < data.dtype.itemsize:
            raise PrecisionMismatch(f"cannot narrow {src.label} data to {dtype}")
        out = data.astype(dtype)
    if out.ndim == 2 and not out.flags.f_contiguous:
        out = np.asfortranarray(out)
    return out


def narrow(values: np.ndarray, p: Precision) -> np.ndarray:
    """Round compute-dtype results to ``p``'s storage representation."""
    if p is Precision.HALF:
        if values.dtype == np.uint16:
            return values
        out = encode_f16_array(np.asarray(values, dtype=np.float64))
    elif p is Precision.SINGLE:
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(values).astype(np.float32, copy=False)
    else:
        out = np.asarray(values, dtype=np.float64)
    if out.ndim == 2 and not out.flags.f_contiguous:
        out = np.asfortranarray(out)
    return out


def execute(key: KernelKey, op_name: str, *inputs, **params):
    """Run ``op_name`` with signature ``key``.

    The first one or two inputs must match ``key.in_a``/``key.in_b``; further
    array inputs are widened to ``key.out`` as well.  Array results are
    returned as MPArrays of precision ``key.out``; scalar results pass through.
    """
    from .array import MPArray

    kernel = REGISTRY.lookup(op_name, key)
    arrays = [x for x in inputs if isinstance(x, MPArray)]
    for arr in arrays:
        if arr.placement is not Placement.CPU:
            raise BackendUnavailable(
                f"{op_name}: operand is placed on {arr.placement}; only the CPU backend is available"
            )
    expected = [key.in_a] if key.in_b is None else [key.in_a, key.in_b]
    for arr, p in zip(arrays, expected):
        if arr.precision is not p:
            raise PrecisionMismatch(
                f"{op_name}: operand precision {arr.precision.label} does not match signature {key}"
            )
    for arr in arrays[len(expected):]:
        if arr.precision > key.out:
            raise PrecisionMismatch(
                f"{op_name}: operand precision {arr.precision.label} exceeds output {key.out.label}"
            )
    dtype = kernel.compute_dtype
    args = [widen(x._data, x.precision, dtype) if isinstance(x, MPArray) else x for x in inputs]
    result = kernel.fn(*args, **params)
    return _wrap(result, key.out)


def _wrap(result, out):
    from .array import MPArray

    if isinstance(result, tuple):
        return tuple(_wrap(r, out) for r in result)
    if isinstance(result, np.ndarray):
        return MPArray._from_storage(narrow(result, out), out)
    return result
