"""Exchange energy as a witness of multipartite entanglement in Heisenberg spin clusters."""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, RunConfig  # noqa: E402
from .spin import SpinQuantum  # noqa: E402

__all__ = ["__version__", "DEFAULT_CONFIG", "RunConfig", "SpinQuantum"]
