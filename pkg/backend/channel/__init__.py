from backend.channel.base_fading import FadingModel
from backend.channel.correlation import CorrelationSpec, correlation_matrix
from backend.channel.estimation import (
    ErrorSet,
    EstimationSpec,
    draw_error_set,
    ls_estimate,
    perturbed_channel_set,
    pilot_matrix,
)
from backend.channel.factory import build_fading_model, build_scenario_models, draw_true_channels
from backend.channel.rayleigh import CorrelatedRayleigh
from backend.channel.rician import Rician

__all__ = [
    "CorrelatedRayleigh",
    "CorrelationSpec",
    "ErrorSet",
    "EstimationSpec",
    "FadingModel",
    "Rician",
    "build_fading_model",
    "build_scenario_models",
    "correlation_matrix",
    "draw_error_set",
    "draw_true_channels",
    "ls_estimate",
    "perturbed_channel_set",
    "pilot_matrix",
]
