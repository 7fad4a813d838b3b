import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stepanov.errors import NegativeTime, NoConvergence
from stepanov.functions import Const, Parametric, Trig
from stepanov.grid import GridWindow
from stepanov.sde import (
    SdeProblem,
    SolverConfig,
    additive_problem,
    exponential_euler_solve,
    ou_exact,
    ou_exact_ensemble,
    picard_solve,
    semigroup_apply,
    solution_distance,
)

ZERO = Const(0.0)


def problem(drift, diffusion, decay=(1.0,), q=(1.0,), **kw):
    return SdeProblem(decay=decay, drift=drift, diffusion=diffusion, q_diag=q, **kw)


def contractive_problem():
    """F = 0.5 sin t - 0.2 x, G = 0.1 sin x + 0.1; K = 0.3, theta ~ 0.49."""
    return problem(
        Parametric("affine", (Const(-0.2), Trig(((0.5, 1.0, 0.0),)))),
        Parametric("sine", (Const(0.1), Const(0.1))),
    )


# --------------------------------------------------------------- semigroup


def test_semigroup_examples():
    x = np.array([1.0, -2.0])
    np.testing.assert_array_equal(semigroup_apply([1.0, 3.0], 0.0, x), x)
    assert semigroup_apply([1.0], math.log(2), [2.0])[0] == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(NegativeTime):
        semigroup_apply([1.0], -0.1, [1.0])


@given(
    st.lists(st.floats(0.01, 5), min_size=1, max_size=4),
    st.floats(0, 20),
    st.lists(st.floats(-100, 100), min_size=4, max_size=4),
)
def test_semigroup_contraction(decay, t, x):
    x = np.array(x[: len(decay)])
    y = semigroup_apply(decay, t, x)
    assert np.linalg.norm(y) <= math.exp(-min(decay) * t) * np.linalg.norm(x) * (1 + 1e-12) + 1e-300


# ----------------------------------------------------------------- solvers


def test_zero_coefficients_give_zero():
    p = problem(Parametric("affine", (ZERO, ZERO)), Parametric("affine", (ZERO, ZERO)))
    cfg = SolverConfig(GridWindow(0.0, 5.0, 0.05), ensemble_n=5, seed=1)
    for solver in (picard_solve, exponential_euler_solve):
        assert np.all(solver(p, cfg).paths == 0.0)


def test_constant_drift_limit():
    b, d = 0.7, 2.0
    p = problem(Parametric("affine", (ZERO, Const(b))), Parametric("affine", (ZERO, ZERO)), decay=(d,))
    cfg = SolverConfig(GridWindow(0.0, 5.0, 0.01), ensemble_n=2, seed=1)
    pic = picard_solve(p, cfg)
    # trapezoid on the exponential weight is exact to O(dt^2)
    np.testing.assert_allclose(pic.paths, b / d, atol=1e-4 * 0 + 2e-5)
    eul = exponential_euler_solve(p, cfg)
    # left-point recursion converges to b dt a / (1 - a), a = e^{-d dt}
    assert eul.paths[0, -1, 0] == pytest.approx(b / d, abs=b * cfg.dt)


def test_constant_drift_picard_within_1e6_at_fine_grid():
    p = problem(Parametric("affine", (ZERO, Const(1.0))), Parametric("affine", (ZERO, ZERO)))
    cfg = SolverConfig(GridWindow(0.0, 2.0, 1e-3), ensemble_n=1)
    assert np.max(np.abs(picard_solve(p, cfg).paths - 1.0)) < 1e-6


def test_ou_variance_matches_closed_form():
    p = additive_problem(1.0, math.sqrt(2.0), 1.0)
    N = 4000
    cfg = SolverConfig(GridWindow(0.0, 5.0, 0.01), ensemble_n=N, seed=3)
    ens = picard_solve(p, cfg)
    v = np.var(ens.paths[:, -1, 0], ddof=1)
    assert abs(v - 1.0) < 3 * math.sqrt(2 / (N - 1))


def test_picard_contraction_rate():
    p = contractive_problem()
    cfg = SolverConfig(GridWindow(0.0, 10.0, 0.02), ensemble_n=300, seed=5, picard_tol=1e-12)
    ens = picard_solve(p, cfg)
    assert ens.theta_st == pytest.approx(0.4930, abs=1e-3)
    d = ens.diagnostics
    assert len(d) >= 4 and d[-1] < 1e-12
    for n in range(1, len(d) - 1):
        assert d[n + 1] / d[n] <= ens.theta_st + 0.1
        assert d[n + 1] < d[n]


def test_no_convergence_when_not_contractive():
    p = problem(Parametric("sine", (Const(3.0), ZERO)), Parametric("affine", (ZERO, Const(0.1))))
    cfg = SolverConfig(GridWindow(0.0, 5.0, 0.05), ensemble_n=10, seed=1, picard_max_iter=2, picard_tol=1e-14)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(NoConvergence):
            picard_solve(p, cfg)


def test_bitwise_determinism_and_chunking():
    p = contractive_problem()
    w = GridWindow(0.0, 4.0, 0.05)
    a = picard_solve(p, SolverConfig(w, ensemble_n=37, seed=9))
    b = picard_solve(p, SolverConfig(w, ensemble_n=37, seed=9, chunk=5))
    assert np.array_equal(a.paths, b.paths)
    c = exponential_euler_solve(p, SolverConfig(w, ensemble_n=37, seed=9, chunk=4))
    d = exponential_euler_solve(p, SolverConfig(w, ensemble_n=37, seed=9))
    assert np.array_equal(c.paths, d.paths)


def test_solvers_agree_at_first_order():
    p = contractive_problem()
    errs = []
    for dt in (0.04, 0.02):
        cfg = SolverConfig(GridWindow(0.0, 10.0, dt), ensemble_n=200, seed=2, picard_tol=1e-12)
        errs.append(solution_distance(picard_solve(p, cfg), exponential_euler_solve(p, cfg)))
    C = errs[0] / 0.04
    assert errs[1] < errs[0]
    assert errs[1] <= 1.5 * C * 0.02


def test_memory_warning():
    p = contractive_problem()
    cfg = SolverConfig(GridWindow(0.0, 1.0, 0.05), ensemble_n=2, memory_t=1.0)
    with pytest.warns(RuntimeWarning, match="memory_t"):
        picard_solve(p, cfg)


def test_problem_conditions():
    checks = contractive_problem().verify_conditions()
    assert all(checks.values())
    bad = problem(Parametric("affine", (Const(2.0), ZERO)), Parametric("affine", (ZERO, ZERO)), lipschitz=Const(1.0))
    assert not bad.verify_conditions()["lipschitz"]
    with pytest.raises(ValueError):
        problem(Parametric("affine", (ZERO, ZERO)), Parametric("affine", (ZERO, ZERO)), decay=(0.0,))


def test_vector_state():
    p = problem(
        Parametric("affine", (Const(-0.1), Trig(((1.0, 1.0, 0.0),)))),
        Parametric("affine", (ZERO, Const(0.2))),
        decay=(1.0, 2.0),
        q=(1.0, 0.5),
    )
    cfg = SolverConfig(GridWindow(0.0, 3.0, 0.02), ensemble_n=20, seed=4, picard_tol=1e-12)
    ens = picard_solve(p, cfg)
    assert ens.paths.shape == (20, 151, 2)
    assert solution_distance(ens, exponential_euler_solve(p, cfg)) < 0.05


# ------------------------------------------------------------------ oracle


def test_ou_exact_stationary_variance_and_autocovariance():
    w = GridWindow(0.0, 3.0, 0.01)
    path, v = ou_exact(1.0, math.sqrt(2.0), 1.0, w, seed=0)
    assert v == pytest.approx(1.0, rel=1e-14) and path.values.shape == (301, 1)
    N = 10_000
    x = ou_exact_ensemble(1.0, math.sqrt(2.0), 1.0, w, seed=1, n_members=N)
    for lag_t in (0.0, 0.5, 1.0):
        k = int(round(lag_t / w.dt))
        a, b = x[:, 100], x[:, 100 + k]
        cov = np.mean(a * b)
        rho = math.exp(-lag_t)
        se = math.sqrt((1 + rho**2) / N)
        assert abs(cov - rho) < 3 * se


def test_gaussian_transition_composes():
    d, v = 0.8, 1.3
    for dt in (0.01, 0.3):
        a1, a2 = math.exp(-d * dt), math.exp(-2 * d * dt)
        s1 = v * (1 - a1**2)
        assert a1 * a1 == pytest.approx(a2, rel=1e-15)
        assert a1**2 * s1 + s1 == pytest.approx(v * (1 - a2**2), rel=1e-14)
