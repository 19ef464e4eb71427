"""Variational eigenvalues of the discretized fractional g-Laplacian."""
from .domain import BC, Field, Grid1D, build_grid
from .kernels import BACKEND
from .young import YoungFunction, from_descriptor, from_functions, power, powersum

__version__ = "0.1.0"

__all__ = ["BC", "BACKEND", "Field", "Grid1D", "YoungFunction", "build_grid",
           "from_descriptor", "from_functions", "power", "powersum", "__version__"]
