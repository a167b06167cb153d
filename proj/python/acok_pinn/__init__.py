"""Allen-Cahn-Ohta-Kawasaki PINN and spectral reference solver."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, DivergenceError, IoError

__all__ = [name for name in dir() if not name.startswith("_")]
