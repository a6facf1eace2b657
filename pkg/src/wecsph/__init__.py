"""SPH wave tank with floating point absorbers coupled to multi-agent SAC."""
__version__ = "0.1.0"
