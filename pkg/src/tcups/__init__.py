"""
Time-correlated ultrafast phonon spectroscopy: simulation and analysis.
"""
__version__ = "0.1.0"

# Import subpackages but not modules to avoid circular imports
from . import analysis
from . import instrument
from . import models
from . import utils

__all__ = ['analysis', 'instrument', 'models', 'utils', '__version__']
