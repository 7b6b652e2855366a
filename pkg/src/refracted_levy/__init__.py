"""q-potential densities of refracted spectrally negative Levy processes.

The package computes the density of the refracted process at an
independent exponential time by two independent analytic routes -- one
built from scale functions, one from the Wiener-Hopf factorisation --
and cross-validates both against a Monte Carlo path simulator.
"""

from .config import PRESETS, load_model_file
from .errors import (
    CapabilityError,
    ConvergenceError,
    DomainError,
    InternalConsistencyError,
    ModelValidationError,
    QuadratureError,
    RefractedLevyError,
)
from .factors import FactorSet
from .mc import (
    EmpiricalDensity,
    SimConfig,
    build_histogram,
    compare_to_density,
    sample_terminal,
    simulate_path,
)
from .model import LevyModel, RefractionParams, validate
from .resolvent import DensityGrid, Resolvent, ResolventQuery
from .roots import RootPair, phi_root, root_pair, varphi_root
from .scale import ExpSum, ScaleEvaluator, build_scale
from .verify import Check, VerifyReport, run_verify

__version__ = "1.0.0"

__all__ = [
    "PRESETS",
    "load_model_file",
    "RefractedLevyError",
    "DomainError",
    "ModelValidationError",
    "ConvergenceError",
    "QuadratureError",
    "CapabilityError",
    "InternalConsistencyError",
    "LevyModel",
    "RefractionParams",
    "validate",
    "RootPair",
    "phi_root",
    "varphi_root",
    "root_pair",
    "ExpSum",
    "ScaleEvaluator",
    "build_scale",
    "FactorSet",
    "Resolvent",
    "ResolventQuery",
    "DensityGrid",
    "SimConfig",
    "EmpiricalDensity",
    "simulate_path",
    "sample_terminal",
    "build_histogram",
    "compare_to_density",
    "Check",
    "VerifyReport",
    "run_verify",
    "__version__",
]
