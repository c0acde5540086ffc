"""Stochastic clustering on the line and its time-reversed weight dynamics.

Points move halfway to a random neighbour, coinciding points merge, and the
configuration is rescaled by 3/4. ``forward`` simulates gap sequences,
``reverse`` the dual integer weight sequences, and ``analysis`` holds the
estimators and identity checks. Hot loops live in ``kernels`` (compiled
when available, numpy otherwise).
"""
from .forward import (
    DegenerateConfiguration,
    DirectionField,
    GapSequence,
    Genealogy,
    MergeRecord,
    PointConfiguration,
    forward_step,
    run_forward,
)
from .kernels import BACKEND
from .laws import DETERMINISTIC, EXPONENTIAL, RHO, TAU, UNIFORM, GapLaw, RenewalLaw
from .renewal import RenewalTrace, sample_stationary_trace
from .reverse import (
    InvariantViolation,
    StepDistribution,
    WeightSequence,
    mass,
    reverse_step,
    run_reverse,
    step_distribution,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DETERMINISTIC",
    "EXPONENTIAL",
    "RHO",
    "TAU",
    "UNIFORM",
    "DegenerateConfiguration",
    "DirectionField",
    "GapLaw",
    "GapSequence",
    "Genealogy",
    "InvariantViolation",
    "MergeRecord",
    "PointConfiguration",
    "RenewalLaw",
    "RenewalTrace",
    "RngStream",
    "StepDistribution",
    "WeightSequence",
    "forward_step",
    "mass",
    "reverse_step",
    "run_forward",
    "run_reverse",
    "sample_stationary_trace",
    "step_distribution",
]
