"""Ionization of a delta-bound particle by time-dependent changes of the binding strength.

Submodules:

* :mod:`deltaion.specfun` complex error functions, the memory kernel, half-integer Bessel functions
* :mod:`deltaion.model1d` closed forms for a rectangular pulse in one dimension
* :mod:`deltaion.volterra` the general amplitude equation solver and its Laplace representation
* :mod:`deltaion.train` periodic trains of short pulses
* :mod:`deltaion.model3d` the delta-shell model in three dimensions
* :mod:`deltaion.cli` command-line front end
"""

from .model1d import (
    Atom1D,
    DomainError,
    ejected_energy,
    ejected_energy_inf,
    ionization_prob,
    spectrum_rect,
    survival_inf,
    theta_asymptotic,
    theta_rect,
)
from .model3d import Atom3D, bound_momentum, evolve3d, theta3d_rect
from .train import TrainSpec, full_train_survival, simplified_train
from .volterra import PulseProgram, VolterraProblem, invert_laplace_theta, solve

__version__ = "0.1.0"

__all__ = [
    "Atom1D",
    "Atom3D",
    "DomainError",
    "PulseProgram",
    "TrainSpec",
    "VolterraProblem",
    "bound_momentum",
    "ejected_energy",
    "ejected_energy_inf",
    "evolve3d",
    "full_train_survival",
    "invert_laplace_theta",
    "ionization_prob",
    "simplified_train",
    "solve",
    "spectrum_rect",
    "survival_inf",
    "theta3d_rect",
    "theta_asymptotic",
    "theta_rect",
]
