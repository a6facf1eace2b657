"""Weakly compressible SPH core: kernel, EOS, neighbour search, rates."""
from .eos import EosSpec, eos_density, eos_pressure
from .kernel import KernelSpec, kernel_eval
from .neighbors import NeighborList, build_neighbors
from .particles import Kind, ParticleSystem
from .rates import RateParams, compute_rates, continuity_rate, momentum_rate, riemann_interface_pressure

__all__ = [
    "EosSpec", "eos_density", "eos_pressure", "KernelSpec", "kernel_eval", "NeighborList",
    "build_neighbors", "Kind", "ParticleSystem", "RateParams", "compute_rates",
    "continuity_rate", "momentum_rate", "riemann_interface_pressure",
]
