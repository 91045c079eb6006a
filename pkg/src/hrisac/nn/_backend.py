"""Kernel-backend selection.

The compiled extension is preferred when importable; set
``HRISAC_NN_BACKEND=numpy`` (or ``compiled``) to force a choice.
"""

import os

_requested = os.environ.get("HRISAC_NN_BACKEND", "auto")
if _requested not in ("auto", "compiled", "numpy"):
    raise RuntimeError(f"HRISAC_NN_BACKEND must be auto|compiled|numpy, got {_requested!r}")

kernels = None
backend_name = "numpy"

if _requested in ("auto", "compiled"):
    try:
        from . import _mlpcore as kernels  # type: ignore[no-redef]
        backend_name = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise

if kernels is None:
    from . import kernels_numpy as kernels  # type: ignore[no-redef]


def available_backends() -> list:
    names = ["numpy"]
    try:
        from . import _mlpcore  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    if name == "numpy":
        from . import kernels_numpy
        return kernels_numpy
    if name == "compiled":
        from . import _mlpcore
        return _mlpcore
    raise ValueError(f"unknown backend {name!r}")
