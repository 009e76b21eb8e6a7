"""Passive decoy-state MDI-QKD with heralded single-photon sources.

Typical use::

    from passive_mdi import RateModel, optimize_point
    point = optimize_point(distance=50, N_t=1e9, model=RateModel())
"""
from .estimator import FluctuationParams
from .fock_bsm import ChannelParams, yield_error, yield_table
from .key_rate import KeyRateResult, RateModel, SecurityParams, evaluate
from .optimizer import OptimizationSpec, optimize_point, sweep
from .source import SourceParams, heralded_distributions

__all__ = [
    "ChannelParams",
    "FluctuationParams",
    "KeyRateResult",
    "OptimizationSpec",
    "RateModel",
    "SecurityParams",
    "SourceParams",
    "evaluate",
    "heralded_distributions",
    "optimize_point",
    "sweep",
    "yield_error",
    "yield_table",
]
