"""Numerical laboratory for u_t - Δu + |∇u|^q = 0 with singular initial data."""

__version__ = "0.1.0"

from .params import (ExponentBundle, GaussianInitialData, ProblemParams,  # noqa: E402
                     UndefinedBarrierError, derive_exponents)
from .grid import Field, RadialGrid  # noqa: E402
from .evolution import (DirichletValue, DirichletZero, MollifiedDirac, Plateau,  # noqa: E402
                        StepperConfig, Trajectory, evolve, large_solution)
from .profile import NoFastDecayProfile, ProfileSolution, shoot_vss  # noqa: E402
from .experiments import ExperimentReport, Verdict  # noqa: E402

__all__ = [
    "ExponentBundle", "GaussianInitialData", "ProblemParams", "UndefinedBarrierError",
    "derive_exponents", "Field", "RadialGrid", "DirichletValue", "DirichletZero",
    "MollifiedDirac", "Plateau", "StepperConfig", "Trajectory", "evolve", "large_solution",
    "NoFastDecayProfile", "ProfileSolution", "shoot_vss", "ExperimentReport", "Verdict",
]
