"""Backend selection for the 6x6 hot kernels.

The compiled extension is used when importable; set ``STIFFKIT_BACKEND=python``
to force the numpy fallback (``cython`` makes a missing extension an error).
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_choice = os.environ.get("STIFFKIT_BACKEND", "auto").lower()
if _choice == "python":
    active = _pykernels
elif _choice == "cython":
    if _ckernels is None:
        raise ImportError("STIFFKIT_BACKEND=cython but stiffkit._ckernels is not built")
    active = _ckernels
else:
    active = _ckernels if _ckernels is not None else _pykernels

BACKEND = active.NAME


def available() -> dict:
    """Importable backends by name."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


def get(name: str | None = None):
    if name is None:
        return active
    try:
        return available()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
