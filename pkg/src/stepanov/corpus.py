"""Concrete functions and ready-made scenarios.

Scenarios bundle a problem, a solver configuration and a list of named
quantitative checks; ``run_scenario`` solves and evaluates them.

* ``affine_levitan`` -- bounded solution of ``x' = -x + h(t)`` with ``h``
  the derivative of the Levitan function ``H = sin(1/g)``;
* ``ou`` -- additive-noise Ornstein-Uhlenbeck process against its exact law;
* ``periodic_sde`` -- ``F = 0.5 sin t - 0.5 x``, ``G = 0.1 (1 + 0.5 sin t)``,
  whose law is ``2 pi``-periodic;
* ``pseudo_ap`` -- the periodic problem with the vanishing drift
  perturbation ``0.2 e^{-|t|/10}`` and its unperturbed companion, so that the
  difference ``Z = X - Y`` can be profiled by ergodic means.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .constants import stepanov_norm
from .deterministic import deterministic_mild_solve
from .ergodic import WeightMeasure, ergodic_profile
from .errors import UnknownScenario
from .functions import Affine, Compose, Const, FunctionSpec, Parametric, Primitive, Sum, Trig
from .grid import GridWindow, SampledPath
from .laws import apd_test, ui_defect
from .sde import (
    Ensemble,
    SdeProblem,
    SolverConfig,
    additive_problem,
    exponential_euler_solve,
    ou_stationary_variance,
    picard_solve,
)


# ------------------------------------------------------------- functions


def levitan(kind: str) -> FunctionSpec:
    """``g = 2 + cos t + cos(sqrt2 t)``, ``H = sin(1/g)`` or its derivative ``h``."""
    names = {"g": "levitan_g", "H": "levitan_H", "h": "levitan_h"}
    if kind not in names:
        raise ValueError(f"levitan kind must be one of g, H, h; got {kind!r}")
    return Primitive(names[kind])


def spike_train(n_max: int = 8) -> FunctionSpec:
    """``exp(sum_n g_n)`` with ``4n``-periodic triangular spikes of height ``n^3``
    and base ``n^-5`` centred at ``n mod 4n``, for ``n = 2 .. n_max``."""
    return Primitive("spike_train", (("n_max", int(n_max)),))


def decaying_bump(amplitude: float = 0.2, scale: float = 10.0) -> FunctionSpec:
    """``amplitude * e^{-|t|/scale}``."""
    abs_t = Compose("abs", Primitive("identity"))
    return Affine(amplitude, 0.0, Compose("exp", Affine(-1.0 / scale, 0.0, abs_t)))


# ------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Check:
    """A named quantitative expectation.

    ``advisory`` checks are reported but do not fail a run.
    """

    name: str
    description: str
    expected: Any
    tolerance: float = 0.0
    advisory: bool = False


@dataclass(frozen=True)
class CheckRecord:
    check: str
    expected: Any
    observed: Any
    tolerance: float
    passed: bool
    advisory: bool = False

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "advisory": self.advisory,
        }


@dataclass(frozen=True)
class DeterministicProblem:
    """``x' = -delta x + forcing(t)``."""

    delta: float
    forcing: FunctionSpec
    forcing_bound: float = 1.0

    def to_dict(self) -> dict:
        return {"kind": "deterministic", "delta": self.delta, "forcing": self.forcing.to_dict()}


def problem_to_dict(problem) -> dict:
    if isinstance(problem, DeterministicProblem):
        return problem.to_dict()
    return {
        "kind": "sde",
        "decay": list(problem.decay),
        "drift": problem.drift.to_dict(),
        "diffusion": problem.diffusion.to_dict(),
        "q_diag": list(problem.q_diag),
        "lipschitz": problem.lipschitz.to_dict(),
        "growth_m": problem.growth_m,
    }


@dataclass(frozen=True)
class Scenario:
    name: str
    problem: Any
    config: SolverConfig
    expected: tuple[Check, ...]
    companion: SdeProblem | None = None
    taus: tuple[float, ...] = ()
    options: dict = field(default_factory=dict)

    def with_overrides(
        self,
        *,
        n: int | None = None,
        seed: int | None = None,
        dt: float | None = None,
        t0: float | None = None,
        t1: float | None = None,
        taus=None,
    ) -> "Scenario":
        w = self.config.window
        window = GridWindow(
            w.t0 if t0 is None else t0, w.t1 if t1 is None else t1, w.dt if dt is None else dt
        )
        config = dataclasses.replace(
            self.config,
            window=window,
            ensemble_n=self.config.ensemble_n if n is None else n,
            seed=self.config.seed if seed is None else seed,
        )
        return dataclasses.replace(
            self, config=config, taus=self.taus if taus is None else tuple(taus)
        )

    def to_dict(self) -> dict:
        c = self.config
        d = {
            "name": self.name,
            "problem": problem_to_dict(self.problem),
            "config": {
                "t0": c.window.t0,
                "t1": c.window.t1,
                "dt": c.window.dt,
                "ensemble_n": c.ensemble_n,
                "seed": c.seed,
                "memory_t": c.memory_t,
                "picard_tol": c.picard_tol,
                "picard_max_iter": c.picard_max_iter,
            },
            "expected": [dataclasses.asdict(x) for x in self.expected],
            "taus": list(self.taus),
        }
        if self.companion is not None:
            d["companion"] = problem_to_dict(self.companion)
        return d


def periodic_problem(a: float = 0.5, k: float = 0.5, perturbation: FunctionSpec | None = None) -> SdeProblem:
    """``F = a sin t - k x (+ perturbation)``, ``G = 0.1 (1 + 0.5 sin t)``, ``delta = 1``."""
    forcing: FunctionSpec = Trig(((a, 1.0, 0.0),))
    if perturbation is not None:
        forcing = Sum((forcing, perturbation))
    return SdeProblem(
        decay=(1.0,),
        drift=Parametric("affine", (Const(-k), forcing)),
        diffusion=Parametric("affine", (Const(0.0), Sum((Const(0.1), Trig(((0.05, 1.0, 0.0),)))))),
        q_diag=(1.0,),
        lipschitz=Const(k + 0.05),
    )


OU_SIGMA = math.sqrt(2.0)


def _affine_levitan() -> Scenario:
    return Scenario(
        name="affine_levitan",
        problem=DeterministicProblem(1.0, levitan("h")),
        config=SolverConfig(GridWindow(-100.0, 100.0, 1e-3), ensemble_n=1, memory_t=40.0),
        expected=(Check("max_abs_x", "max_t |x(t)| <= 2", 2.0, 1e-3),),
    )


def _ou() -> Scenario:
    v = ou_stationary_variance(1.0, OU_SIGMA, 1.0)
    return Scenario(
        name="ou",
        problem=additive_problem(1.0, OU_SIGMA, 1.0),
        config=SolverConfig(GridWindow(0.0, 20.0, 1e-2), ensemble_n=10_000, seed=7),
        expected=(
            Check("stationary_variance", "sample variance at t1 within 3 SE of sigma^2 trQ/(2 delta)", v, 3.0),
            Check("lag1_autocovariance", "Cov(X(t1-1), X(t1)) within 3 SE of v e^{-delta}", v * math.exp(-1.0), 3.0),
        ),
        options={"solvers": ("picard", "exponential_euler")},
    )


def _periodic_sde() -> Scenario:
    return Scenario(
        name="periodic_sde",
        problem=periodic_problem(),
        config=SolverConfig(GridWindow(0.0, 30.0, 0.05), ensemble_n=5000, seed=11),
        expected=(
            Check("apd_accept_2pi", "apd_test accepts tau = 2 pi", True, 0.05),
            Check("apd_reject_pi", "apd_test rejects tau = pi", True, 0.05),
            Check("ui_defect", "ui_defect(p=2, c=25 sup_t E|X|^2) < 0.01", 0.0, 0.01),
            Check("picard_ratio", "Picard increment ratios <= theta_St + 0.1 from iteration 2", True, 0.1),
            Check("theta_st_below_one", "theta_St from |K|_S2 = 0.55 is < 1", 1.0, 0.0, advisory=True),
        ),
        taus=(2 * math.pi, math.pi),
    )


def _pseudo_ap() -> Scenario:
    return Scenario(
        name="pseudo_ap",
        problem=periodic_problem(perturbation=decaying_bump(0.2, 10.0)),
        companion=periodic_problem(),
        config=SolverConfig(GridWindow(-200.0, 200.0, 0.1), ensemble_n=2000, seed=13),
        expected=(
            Check("ergodic_decay", "Lebesgue mean of (E|Z|^2)^{1/2}: mean(200) < 0.5 mean(25)", 0.5, 0.0),
        ),
    )


_REGISTRY = {
    "affine_levitan": _affine_levitan,
    "ou": _ou,
    "periodic_sde": _periodic_sde,
    "pseudo_ap": _pseudo_ap,
}

SCENARIOS = tuple(_REGISTRY)


def scenario(name: str) -> Scenario:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None


# ------------------------------------------------------------- running


@dataclass
class ScenarioRun:
    """Outputs of ``run_scenario``."""

    scenario: Scenario
    records: list[CheckRecord]
    ensembles: dict[str, Ensemble] = field(default_factory=dict)
    path: SampledPath | None = None
    apd_rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if not r.advisory)


def _ou_checks(scn: Scenario, ens: Ensemble, label: str) -> list[CheckRecord]:
    x = ens.paths[:, :, 0]
    N = x.shape[0]
    v = ou_stationary_variance(1.0, OU_SIGMA, 1.0)
    var = float(np.var(x[:, -1], ddof=1))
    se_var = v * math.sqrt(2.0 / (N - 1))
    lag = int(round(1.0 / ens.window.dt))
    a, b = x[:, -1 - lag], x[:, -1]
    cov = float(np.mean((a - a.mean()) * (b - b.mean())) * N / (N - 1))
    rho = math.exp(-1.0)
    se_cov = v * math.sqrt((1 + rho * rho) / N)
    return [
        CheckRecord(f"stationary_variance[{label}]", v, var, 3 * se_var, abs(var - v) <= 3 * se_var),
        CheckRecord(f"lag1_autocovariance[{label}]", v * rho, cov, 3 * se_cov, abs(cov - v * rho) <= 3 * se_cov),
    ]


def run_scenario(scn: Scenario) -> ScenarioRun:
    """Solve ``scn`` and evaluate its checks."""
    cfg = scn.config
    if scn.name == "affine_levitan":
        prob = scn.problem
        x = deterministic_mild_solve(prob.delta, prob.forcing, cfg.window, cfg.memory_t)
        m = float(np.max(np.abs(x.scalar)))
        rec = CheckRecord("max_abs_x", 2.0, m, 1e-3, m <= 2.0 + 1e-3)
        return ScenarioRun(scn, [rec], path=x)

    if scn.name == "ou":
        run = ScenarioRun(scn, [])
        for solver in (picard_solve, exponential_euler_solve):
            ens = solver(scn.problem, cfg)
            run.ensembles[ens.method] = ens
            run.records += _ou_checks(scn, ens, ens.method)
        return run

    if scn.name == "periodic_sde":
        ens = picard_solve(scn.problem, cfg)
        run = ScenarioRun(scn, [], ensembles={"picard": ens})
        taus = scn.taus or (2 * math.pi, math.pi)
        run.apd_rows = apd_test(ens, taus, 0.05, 2.0)
        for row in run.apd_rows:
            if math.isclose(row.tau_requested, 2 * math.pi, rel_tol=1e-6):
                run.records.append(CheckRecord("apd_accept_2pi", "<= 0.05", row.sup_distance, 0.05, row.accepted))
            elif math.isclose(row.tau_requested, math.pi, rel_tol=1e-6):
                run.records.append(CheckRecord("apd_reject_pi", "> 0.05", row.sup_distance, 0.05, not row.accepted))
        scale = float(np.max(ens.mean_square()))
        ui = ui_defect(ens, 2.0, 25 * scale)
        run.records.append(CheckRecord("ui_defect", "< 0.01", ui, 0.01, ui < 0.01))
        d = ens.diagnostics
        ratios = [d[i + 1] / d[i] for i in range(1, len(d) - 1) if d[i] > 0]
        worst = max(ratios) if ratios else 0.0
        run.records.append(
            CheckRecord("picard_ratio", f"<= {ens.theta_st + 0.1:.6g}", worst, 0.1, worst <= ens.theta_st + 0.1)
        )
        run.records.append(
            CheckRecord("theta_st_below_one", "< 1", ens.theta_st, 0.0, ens.theta_st < 1, advisory=True)
        )
        run.extra["k_norm_s2"] = stepanov_norm(scn.problem.lipschitz, 2.0, (cfg.window.t0, cfg.window.t1), dt=1e-2)
        return run

    if scn.name == "pseudo_ap":
        X = picard_solve(scn.problem, cfg)
        Y = picard_solve(scn.companion, cfg)
        z_rms = np.sqrt(np.mean(np.sum((X.paths - Y.paths) ** 2, axis=2), axis=0))
        zpath = SampledPath(cfg.window, z_rms)
        prof = dict(ergodic_profile(zpath, WeightMeasure.lebesgue(), [25.0, 200.0]))
        ratio = prof[200.0] / prof[25.0] if prof[25.0] > 0 else math.inf
        run = ScenarioRun(scn, [], ensembles={"X": X, "Y": Y}, path=zpath)
        run.extra["profile"] = prof
        run.records.append(CheckRecord("ergodic_decay", "< 0.5", ratio, 0.0, ratio < 0.5))
        return run

    raise UnknownScenario(scn.name)  # pragma: no cover


# ------------------------------------------------------------- experiments


@dataclass(frozen=True)
class StabilityResult:
    etas: tuple[float, ...]
    distances: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float


def stability_experiment(
    etas=(0.1, 0.05, 0.025),
    *,
    n: int = 500,
    seed: int = 17,
    window: GridWindow | None = None,
) -> StabilityResult:
    """Distance of solutions of the periodic problem with drift ``F + eta sin t``
    to the unperturbed solution, ``sup_t (E|X_eta - X|^2)^{1/2}``, against
    ``eta`` (shared Brownian driver), with a least-squares line through the
    points."""
    from scipy.stats import linregress

    from .sde import solution_distance

    window = window or GridWindow(0.0, 30.0, 0.05)
    cfg = SolverConfig(window, ensemble_n=n, seed=seed)
    base = picard_solve(periodic_problem(), cfg)
    dists = []
    for eta in etas:
        pert = picard_solve(periodic_problem(perturbation=Trig(((eta, 1.0, 0.0),))), cfg)
        dists.append(solution_distance(pert, base))
    fit = linregress(np.asarray(etas, dtype=float), np.asarray(dists))
    return StabilityResult(tuple(etas), tuple(dists), float(fit.slope), float(fit.intercept), float(fit.rvalue**2))
