"""Fisher-Rao geometry, geodesic flows and complexity measures for
parametric statistical families, with a maximum relative entropy updater."""

from . import complexity, dynamics, geometry, models, mre, scenarios
from .errors import IgacError

__version__ = "0.1.0"

__all__ = ["models", "geometry", "dynamics", "complexity", "mre", "scenarios",
           "IgacError", "__version__"]
