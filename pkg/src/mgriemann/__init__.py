"""Multi-medium Riemann solver and sharp-interface 1D simulator for
Mie-Grueneisen fluids and hydro-elastoplastic solids."""

from ._jit import backend
from .eos import EosParams, Variant, validate_convexity
from .errors import MgRiemannError
from .plasticity import DeviatoricModel, Phase, SideState
from .riemann import RiemannInput, RiemannSide, StarState, sample_fan, solve, solve_fluid

__version__ = "0.1.0"

__all__ = [
    "backend", "EosParams", "Variant", "validate_convexity", "MgRiemannError",
    "DeviatoricModel", "Phase", "SideState", "RiemannInput", "RiemannSide", "StarState",
    "sample_fan", "solve", "solve_fluid", "__version__",
]
