"""Stability lab for nearly integrable symplectic maps and symplectic integrators."""

from .domain import ActionAngleState, DomainSpec, FrequencyMap, make_rng, rescale
from .errors import (DivergenceError, DomainError, HypothesisError, LabError, NonresonanceError,
                     ParameterError, RepresentationError)
from .fourier import FourierGenFunction, vectorfield_norm, weighted_norm
from .lattice import Lattice, enumerate_k_lattices
from .poly import PolyCoeff

__version__ = "0.1.0"
