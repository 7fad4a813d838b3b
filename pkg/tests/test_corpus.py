import json
import math

import numpy as np
import pytest

from stepanov.corpus import (
    SCENARIOS,
    decaying_bump,
    levitan,
    periodic_problem,
    scenario,
    spike_train,
)
from stepanov.errors import UnknownScenario
from stepanov.functions import evaluate
from stepanov.sde import SdeProblem


def test_levitan_values():
    g, H, h = (levitan(k) for k in "gHh")
    assert evaluate(g, 0.0) == 4.0
    assert evaluate(H, 0.0) == pytest.approx(math.sin(0.25), rel=1e-15)
    assert evaluate(h, 0.0) == 0.0
    t = 1.3
    gt = 2 + math.cos(t) + math.cos(math.sqrt(2) * t)
    assert evaluate(H, t) == pytest.approx(math.sin(1 / gt), rel=1e-14)
    with pytest.raises(ValueError):
        levitan("G")


def test_h_is_the_derivative_of_H(rng):
    H, h, g = levitan("H"), levitan("h"), levitan("g")
    t = rng.uniform(-1000, 1000, size=1000)
    t = t[evaluate(g, t) > 0.05]
    step = 1e-6
    fd = (evaluate(H, t + step) - evaluate(H, t - step)) / (2 * step)
    # central differences: O(step^2 H''') + rounding O(eps / step), scaled by g^-4
    scale = evaluate(g, t) ** -4
    assert np.all(np.abs(fd - evaluate(h, t)) <= 1e-6 * np.maximum(1.0, scale))


def test_g_is_strictly_positive_but_gets_small():
    t = np.linspace(-2000, 2000, 1_000_001)
    v = evaluate(levitan("g"), t)
    assert np.all(v > 0)
    assert v.min() < 0.01


def test_spike_train_examples():
    f = spike_train(4)
    assert evaluate(f, 0.0) == 1.0
    assert evaluate(f, 2.0) == pytest.approx(math.exp(8.0), rel=1e-12)
    assert evaluate(f, 3.0 + 12.0) == pytest.approx(math.exp(27.0), rel=1e-12)
    # off the narrow base the spike vanishes
    assert evaluate(f, 2.0 + 2.0**-5) == 1.0


def test_decaying_bump():
    b = decaying_bump(0.2, 10.0)
    assert evaluate(b, 0.0) == pytest.approx(0.2)
    assert evaluate(b, -10.0) == pytest.approx(0.2 / math.e)
    assert evaluate(b, 10.0) == pytest.approx(0.2 / math.e)


def test_scenario_registry():
    assert set(SCENARIOS) == {"affine_levitan", "ou", "periodic_sde", "pseudo_ap"}
    with pytest.raises(UnknownScenario):
        scenario("nope")


@pytest.mark.parametrize(
    "name, t0, t1, dt, n, seed",
    [
        ("affine_levitan", -100.0, 100.0, 1e-3, 1, 0),
        ("ou", 0.0, 20.0, 1e-2, 10_000, 7),
        ("periodic_sde", 0.0, 30.0, 0.05, 5000, 11),
        ("pseudo_ap", -200.0, 200.0, 0.1, 2000, 13),
    ],
)
def test_scenario_configs(name, t0, t1, dt, n, seed):
    s = scenario(name)
    w = s.config.window
    assert (w.t0, w.t1, w.dt) == (t0, t1, dt)
    assert s.config.ensemble_n == n and s.config.seed == seed
    d = json.loads(json.dumps(s.to_dict()))
    assert d["name"] == name and d["config"]["seed"] == seed
    assert all({"name", "expected", "tolerance"} <= set(c) for c in d["expected"])


def test_overrides_leave_the_original_alone():
    s = scenario("periodic_sde")
    o = s.with_overrides(n=10, seed=3, dt=0.1, t1=5.0, taus=[1.0])
    assert (o.config.ensemble_n, o.config.seed, o.config.window.dt, o.config.window.t1) == (10, 3, 0.1, 5.0)
    assert o.taus == (1.0,)
    assert s.config.ensemble_n == 5000 and s.taus == (2 * math.pi, math.pi)


def test_periodic_problem_structure():
    p = periodic_problem()
    assert isinstance(p, SdeProblem)
    checks = p.verify_conditions()
    assert all(checks.values())
    s = scenario("pseudo_ap")
    assert s.companion is not None
    d = s.to_dict()
    assert "companion" in d
