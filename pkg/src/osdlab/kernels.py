"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used.  :func:`set_backend` switches explicitly, which the
benchmark and the cross-backend tests rely on.
"""

from __future__ import annotations

import logging

from . import _pykernels

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    log.debug("compiled kernels unavailable, using numpy fallback")

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def set_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


def get_backend(name: str | None = None):
    return _active if name is None else _BACKENDS[name]


def rref_batch(G, orders):
    return _active.rref_batch(G, orders)


def reprocess_batch(parity, rt, ptr, idx, keep):
    return _active.reprocess_batch(parity, rt, ptr, idx, keep)
