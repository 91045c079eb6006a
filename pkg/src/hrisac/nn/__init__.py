"""Minimal dense-network substrate for the actor/critic learner.

The elementwise and matmul kernels come from either the compiled
``_mlpcore`` extension or the numpy fallback, chosen at import time
(see ``_backend``).
"""

from ._backend import available_backends, backend_name, get_backend
from .mlp import Adam, Mlp, load_mlp, save_mlp, soft_update

__all__ = [
    "Adam",
    "Mlp",
    "available_backends",
    "backend_name",
    "get_backend",
    "load_mlp",
    "save_mlp",
    "soft_update",
]
