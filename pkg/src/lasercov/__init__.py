"""Coverage analysis and simulation of laser-powered UAV cellular networks."""

from .errors import ConfigError, InfeasibleError, NumericalError
from .model import SystemConfig, default_config, validate

__version__ = "0.1.0"

__all__ = ["ConfigError", "InfeasibleError", "NumericalError", "SystemConfig",
           "default_config", "validate", "__version__"]
