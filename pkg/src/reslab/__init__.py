"""Resonances, Gamow functions and exact spectral time evolution in 1D.

Natural units throughout: m = 1/2, hbar = 1, so H = -d^2/dx^2 + V.
"""

from .errors import (AtResonance, ConfigError, DegeneratePoint, GridMismatch, InconsistentRoot,
                     NotApplicable, PrecisionExhausted, ReslabError, TruncationError)
from .oracle import GridWave, compare, propagate_crank_nicolson
from .pole import laurent_split_diagnostic, pole_approximation_evolution
from .potential import PiecewisePotential, evaluate, make_double_well, make_rectangular_well
from .resonance import (GamowFunction, Resonance, decay_rate_si, find_resonances,
                        gamow_from_resonance, smooth_truncate, truncate)
from .sampled import SampledFunction
from .scattering import (EigenfunctionValue, ScatteringSolution, bound_state_diagnostic,
                         closed_form_double_well, eigenfunction_at, solve_scattering,
                         transmission_reflection, wronskian_residual)
from .spectral import (EvolutionResult, SpectralCoefficients, evolve, forward_transform,
                       inverse_transform, survival_probability)
from .units import UnitScheme

__all__ = [
    "AtResonance", "ConfigError", "DegeneratePoint", "GridMismatch", "InconsistentRoot",
    "NotApplicable", "PrecisionExhausted", "ReslabError", "TruncationError",
    "GridWave", "compare", "propagate_crank_nicolson",
    "laurent_split_diagnostic", "pole_approximation_evolution",
    "PiecewisePotential", "evaluate", "make_double_well", "make_rectangular_well",
    "GamowFunction", "Resonance", "decay_rate_si", "find_resonances", "gamow_from_resonance",
    "smooth_truncate", "truncate", "SampledFunction",
    "EigenfunctionValue", "ScatteringSolution", "bound_state_diagnostic",
    "closed_form_double_well", "eigenfunction_at", "solve_scattering",
    "transmission_reflection", "wronskian_residual",
    "EvolutionResult", "SpectralCoefficients", "evolve", "forward_transform",
    "inverse_transform", "survival_probability", "UnitScheme",
]
