"""photoion: numerical laboratory for a simplified atom-photon model of photoionization."""
from ._backend import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
