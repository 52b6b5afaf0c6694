"""Interference modelling for cellular uplinks.

Poisson-field interference simulation, inverse Gaussian / inverse Weibull
mixture fitting, goodness-of-fit scoring, parameter laws and MIMO link
performance.
"""

from .heavytail_dist import IGParams, IWParams, MixtureParams
from .stochastic_net import ChannelParams, ConfigError, NetworkConfig, SampleSet, SectoredAntenna

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "ConfigError",
    "IGParams",
    "IWParams",
    "MixtureParams",
    "NetworkConfig",
    "SampleSet",
    "SectoredAntenna",
]
