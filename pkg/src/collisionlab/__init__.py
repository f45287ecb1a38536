"""Numerical laboratory for one-shot achievability bounds built on the collision relative entropy."""

from .channelcode import CQChannel, Codebook, CodingExperiment
from .config import Settings, get_settings, settings
from .divergence import (
    SpectrumQuery,
    collision_divergence,
    info_spectrum,
    info_variance,
    relative_entropy,
)
from .errors import ConvergenceError, NotPSDError, SizeCapError, SupportError, ValidationError
from .experiment import ExperimentResult
from .hyptest import HypothesisInstance
from .sidecomp import HashAssignment, SWExperiment
from .states import POVM, CQState

__all__ = [
    "CQChannel",
    "CQState",
    "Codebook",
    "CodingExperiment",
    "ConvergenceError",
    "ExperimentResult",
    "HashAssignment",
    "HypothesisInstance",
    "NotPSDError",
    "POVM",
    "SWExperiment",
    "Settings",
    "SizeCapError",
    "SpectrumQuery",
    "SupportError",
    "ValidationError",
    "collision_divergence",
    "get_settings",
    "info_spectrum",
    "info_variance",
    "relative_entropy",
    "settings",
]
