"""Special functions, finite differences, caching and output helpers"""

from .cache import SpectrumCache, spectrum_cache
from .checks import CheckRecorder

__all__ = ['SpectrumCache', 'spectrum_cache', 'CheckRecorder']
