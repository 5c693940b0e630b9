"""Acoustic scattering by sound-soft open arcs and Newton-type crack reconstruction."""

__version__ = "0.1.0"

from .geometry import ChebCrack, CrackSet, GeometryError, ParametricCrack, TrigCrack, validity_check  # noqa: E402
from .forward import FarFieldSet, ForwardSystem, add_noise, far_field, solve_density, synthesize  # noqa: E402
from .frechet import fd_jacobian, frechet_farfield, jacobian  # noqa: E402
from .inversion import NewtonConfig, residual, run_multi_freq, run_single_freq  # noqa: E402
from .lowfreq import asymptotic_check, solve_profile  # noqa: E402
from .sampling import dsm_indicator, extract_initial_cracks  # noqa: E402

__all__ = [
    "ChebCrack", "CrackSet", "GeometryError", "ParametricCrack", "TrigCrack", "validity_check",
    "FarFieldSet", "ForwardSystem", "add_noise", "far_field", "solve_density", "synthesize",
    "fd_jacobian", "frechet_farfield", "jacobian",
    "NewtonConfig", "residual", "run_multi_freq", "run_single_freq",
    "asymptotic_check", "solve_profile",
    "dsm_indicator", "extract_initial_cracks",
]
