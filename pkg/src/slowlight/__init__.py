"""Slow light in a spectral-hole-burnt Fabry-Perot cavity.

Pipeline: absorption profile -> Kramers-Kronig dispersion -> Airy transfer
and resonance table -> linear pulse propagation -> figures of merit.
"""

from slowlight.errors import ConfigError, InvalidParameter

__version__ = "0.1.0"

__all__ = ["ConfigError", "InvalidParameter", "__version__"]
