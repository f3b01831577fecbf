"""Monte-Carlo simulator for OAM-encoded QKD through evolving atmospheric
turbulence with beacon-based adaptive-optics correction."""

__version__ = "0.1.0"

from .grid import ComplexField, Grid
from .modes import LGModeSpec, ang_coeffs, aperture_inner_product, lg_field
from .qkd import CrosstalkMatrix, ProtocolConfig, qber, secret_key_rate
from .turbulence import PhaseScreen, TurbulenceParams, phase_covariance
from .ao import AOConfig
from .runner import ExperimentConfig, derived_params, run_experiment

__all__ = [
    "AOConfig",
    "ComplexField",
    "CrosstalkMatrix",
    "ExperimentConfig",
    "Grid",
    "LGModeSpec",
    "PhaseScreen",
    "ProtocolConfig",
    "TurbulenceParams",
    "ang_coeffs",
    "aperture_inner_product",
    "derived_params",
    "lg_field",
    "phase_covariance",
    "qber",
    "run_experiment",
    "secret_key_rate",
    "__version__",
]
