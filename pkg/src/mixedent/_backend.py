"""Select the kernel implementation at import time.

``MIXEDENT_BACKEND=python`` forces the numpy fallback; ``cython`` makes a
missing extension an error instead of a silent fallback.
"""
import os

from . import _pykernels

_choice = os.environ.get("MIXEDENT_BACKEND", "").strip().lower()


def _load_compiled():
    from . import _kernels
    return _kernels


if _choice == "python":
    kernels = _pykernels
    NAME = "python"
else:
    try:
        kernels = _load_compiled()
        NAME = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        kernels = _pykernels
        NAME = "python"


def available():
    """Names of the kernel implementations importable in this environment."""
    names = ["python"]
    try:
        _load_compiled()
    except ImportError:
        return names
    return ["cython"] + names


def get(name):
    """Kernel module by name (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return _load_compiled()
    raise ValueError(f"unknown backend {name!r}")
