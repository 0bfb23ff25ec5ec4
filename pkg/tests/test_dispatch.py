import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mpnum as mp
from mpnum import dispatch
from mpnum.dispatch import REGISTRY, KernelKey, KernelRegistry, execute, resolve
from mpnum.errors import BackendUnavailable, PrecisionMismatch, UnknownOperation
from mpnum.precision import Placement, Precision

PS = list(Precision)
PAIRS = list(itertools.product(PS, repeat=2))


@pytest.mark.parametrize("a, b", PAIRS)
def test_all_nine_pairs_resolve_to_join(a, b):
    key = resolve("add", a, b)
    assert key == KernelKey(a, b, max(a, b))


@pytest.mark.parametrize("a, b", PAIRS)
def test_mixed_add_result_precision(a, b):
    x = mp.from_doubles([1.0, 2.0, 3.0], precision=a)
    y = mp.from_doubles([0.5, 0.25, 0.125], precision=b)
    z = x + y
    assert z.precision is max(a, b)
    assert np.array_equal(z.to_doubles(), [1.5, 2.25, 3.125])


def test_every_binary_op_has_all_signatures():
    for op in REGISTRY.operations():
        n = len(REGISTRY.keys(op))
        if REGISTRY.arity(op) == 1:
            assert n == 3
        else:
            assert n >= 9


def test_unknown_operation():
    with pytest.raises(UnknownOperation):
        resolve("frobnicate", Precision.HALF)
    with pytest.raises(UnknownOperation):
        REGISTRY.lookup("add", KernelKey(Precision.DOUBLE, Precision.DOUBLE, Precision.HALF))
    assert issubclass(UnknownOperation, LookupError)


def test_registry_frozen_after_import():
    with pytest.raises(RuntimeError):
        REGISTRY.register("late", lambda x: x, arity=1)


def test_private_registry():
    reg = KernelRegistry()
    reg.register("neg", lambda x: -x, arity=1)
    assert reg.operations() == ["neg"]
    assert len(reg.keys("neg")) == 3
    with pytest.raises(ValueError):
        reg.register("bad", lambda: 0, arity=3)


def test_gpu_placement_refused():
    x = mp.from_doubles([1.0, 2.0], placement="GPU")
    assert x.placement is Placement.GPU
    with pytest.raises(BackendUnavailable):
        x + x


def test_execute_checks_signature():
    x = mp.from_doubles([1.0], precision="single")
    with pytest.raises(PrecisionMismatch):
        execute(KernelKey(Precision.DOUBLE, Precision.DOUBLE, Precision.DOUBLE), "add", x, x)


@given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=1, max_size=30),
       st.sampled_from(PS), st.sampled_from(PS))
def test_widening_is_exact(vals, src, dst):
    if dst < src:
        return
    x = mp.from_doubles(vals, precision=src)
    w = dispatch.widen(x._data, src, dst.compute_dtype)
    assert np.array_equal(w.astype(np.float64), x.to_doubles())


@given(st.lists(st.floats(-6e4, 6e4, allow_nan=False), min_size=1, max_size=30), st.sampled_from(PS))
def test_narrow_rounds_once(vals, p):
    got = dispatch.narrow(np.array(vals), p)
    ref = mp.precision.round_array(np.array(vals), p)
    assert np.array_equal(got, ref)


def test_widen_refuses_narrowing():
    with pytest.raises(PrecisionMismatch):
        dispatch.widen(np.zeros(2), Precision.DOUBLE, np.float32)


def test_half_kernels_compute_in_single():
    k = REGISTRY.lookup("add", resolve("add", Precision.HALF, Precision.HALF))
    assert k.compute_dtype == np.float32
    k = REGISTRY.lookup("sum", resolve("sum", Precision.HALF))
    assert k.compute_dtype == np.float64


def test_gemm_accepts_wider_output():
    keys = REGISTRY.keys("gemm")
    assert KernelKey(Precision.HALF, Precision.HALF, Precision.DOUBLE) in keys
    assert KernelKey(Precision.SINGLE, Precision.DOUBLE, Precision.SINGLE) not in keys
