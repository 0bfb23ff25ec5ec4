"""Kernel backend selection and thread configuration.

The compiled extension is used when importable; otherwise (or when
``MPNUM_BACKEND=python``) the numpy fallback is used.  Both expose the same
functions and produce identical bits.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels


def _initial_backend():
    requested = os.environ.get("MPNUM_BACKEND", "").strip().lower()
    if requested:
        if requested not in _BACKENDS:
            raise ImportError(
                f"MPNUM_BACKEND={requested!r} is not available; have {sorted(_BACKENDS)}"
            )
        return _BACKENDS[requested]
    return _ckernels if _ckernels is not None else _pykernels


def _initial_threads():
    raw = os.environ.get("MPNUM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"MPNUM_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"MPNUM_THREADS must be a positive integer, got {raw!r}")
    return value


_active = _initial_backend()
_threads = _initial_threads()


def kernels():
    return _active


def available():
    return sorted(_BACKENDS)


def backend_name():
    return _active.NAME


def use_backend(name):
    """Switch the active backend ("compiled" or "python"); returns the previous name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available()}")
    previous = _active.NAME
    _active = _BACKENDS[name]
    return previous


def get_num_threads():
    return _threads


def set_num_threads(n):
    global _threads
    n = int(n)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = n
