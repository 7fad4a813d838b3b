"""Stepanov-type almost periodicity: metrics, almost-period scans, mild
solutions of semilinear SDEs and distribution-level tests."""

from .constants import kappa_profile, stepanov_norm, theta_prime_st, theta_st
from .corpus import levitan, run_scenario, scenario, spike_train
from .deterministic import deterministic_mild_solve
from .ergodic import WeightMeasure, ergodic_profile, stepanov_window_profile
from .functions import FunctionSpec, Parametric, compose, evaluate, from_dict, from_json, sample
from .grid import GridWindow, SampledPath
from .laws import EmpiricalLaw, apd_test, dbl, law_at, ui_defect, wasserstein
from .metrics import (
    AlmostPeriodSet,
    MetricKind,
    bochner_slice,
    distance,
    max_gap,
    mp_prime_defect,
    OscillationWitness,
    oscillation_witness,
    scan_almost_periods,
)
from .noise import BrownianDriver
from .sde import (
    Ensemble,
    SdeProblem,
    SolverConfig,
    exponential_euler_solve,
    ou_exact,
    picard_solve,
    semigroup_apply,
)

__all__ = [name for name in dir() if not name.startswith("_")]
