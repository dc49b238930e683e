"""Lyapunov exponents of products of free operators from the law of X*X."""

from .errors import BoundaryError, DomainError, HypothesisWarning, PreconditionError
from .spectral_measures import (ContinuousSegment, MpParameters, SpectralMeasure, atomic_measure,
                                compressed_mp_measure, log_integral, moment, mp_measure, point_mass)
from .transforms import STransform, cauchy, psi, psi_inverse, s_product, s_transform
from .lyapunov import (exponent_distribution, fk_determinant, integrated_exponent,
                       largest_exponent, lyapunov_profile, marginal_exponent, newman_solve,
                       s_from_determinant)

__version__ = "0.1.0"
