"""Environments: the SPH coupling bridge and an analytic oscillator surrogate."""
