import math

import numpy as np
import pytest

from damped_euler_lab import analysis as an
from damped_euler_lab.config import RunConfig
from damped_euler_lab.damping import NoDamping, PowerTime, SpaceTimeBuiltin
from damped_euler_lab.solver import NG, FieldState, Grid1D, run
from damped_euler_lab.thermo import PressureLaw


def velocity_state(v_of_x, gamma=2.0, n=400, half=2.0):
    """u = 1, v = v_of_x(x) on [-half, half]."""
    law = PressureLaw(gamma)
    grid = Grid1D(-half, half, n)
    r, s = law.to_riemann(np.ones(n + 2 * NG), v_of_x(grid.x_ext))
    return FieldState(0.0, grid, law, r, s), law


def test_fit_scaling_synthetic():
    eps = np.array([0.05, 0.1, 0.2, 0.4])
    fit = an.fit_scaling(list(zip(eps, eps ** -2.0)), "PowerLaw")
    assert fit.slope == pytest.approx(-2.0, abs=1e-12) and fit.r_squared == pytest.approx(1.0)
    fit = an.fit_scaling(list(zip(eps, np.exp(3 / eps))), "ExpLaw")
    assert fit.slope == pytest.approx(3.0, abs=1e-12) and fit.r_squared == pytest.approx(1.0)
    assert fit.to_dict() == {"regime": "ExpLaw", "exponent_or_coefficient": fit.slope,
                             "r_squared": fit.r_squared, "n_samples": 4}
    with pytest.raises(an.InsufficientData):
        an.fit_scaling([(0.1, 1.0), (0.2, 2.0), (0.4, math.inf)])


def test_richardson():
    exact, c = 10.0, 0.3
    times = [exact + c * h ** 2 for h in (0.4, 0.2, 0.1)]
    est, p = an.richardson(times)
    assert p == pytest.approx(2.0) and est == pytest.approx(exact, abs=1e-12)
    times = [exact + c * h ** 1.3 for h in (0.4, 0.2, 0.1)]
    est, p = an.richardson(times)
    assert p == pytest.approx(1.3) and est == pytest.approx(exact, abs=1e-12)
    # non-monotone samples: no extrapolation
    est, p = an.richardson([10.0, 10.2, 10.1])
    assert est == 10.1
    est, p = an.richardson([10.4, 10.1])
    assert p == 2.0 and est == pytest.approx(10.0)


def test_hypothesis_undamped_negative_gradient_predicts_blowup():
    st, law = velocity_state(lambda x: -0.2 * np.tanh(x))
    v = an.check_blowup_hypothesis(st, law, NoDamping(), "gradient_threshold")
    assert v.kind == "PredictsBlowup" and len(v.witness_x) > 0


def test_hypothesis_nonnegative_gradients_give_no_prediction():
    st, law = velocity_state(lambda x: 0.2 * np.tanh(x))
    assert an.check_blowup_hypothesis(st, law, NoDamping(), "gradient_threshold").kind == "NoPrediction"
    assert an.check_blowup_hypothesis(st, law, NoDamping(), "weighted_gradient").kind == "NoPrediction"


def test_hypothesis_smallness_violation():
    st, law = velocity_state(lambda x: -2.0 * np.tanh(x))
    v = an.check_blowup_hypothesis(st, law, NoDamping(), "gradient_threshold")
    assert v.kind == "HypothesisViolated"


@pytest.mark.parametrize("slope,kind", [(-4.2, "PredictsBlowup"), (-3.8, "NoPrediction")])
def test_weighted_threshold_gamma2_critical_damping(slope, kind):
    # gamma = 2, u0 = 1, lambda = 2: sqrt(c0) r_x < -(lambda/2) theta(1) = -4
    st, law = velocity_state(lambda x: np.clip(slope * x, -0.1, 0.1), n=4000)
    assert law.theta(1.0) == pytest.approx(4.0)
    v = an.check_blowup_hypothesis(st, law, PowerTime(2, 1), "weighted_gradient")
    assert v.kind == kind


@pytest.mark.parametrize("gamma,model", [(3.0, PowerTime(1, 1)), (2.0, PowerTime(1, 0.5)),
                                         (2.0, PowerTime(3, 1))])
def test_weighted_variant_range_errors(gamma, model):
    st, law = velocity_state(lambda x: -0.1 * np.tanh(x), gamma=gamma)
    with pytest.raises(an.RangeError):
        an.check_blowup_hypothesis(st, law, model, "weighted_gradient")


def test_variant_must_match_damping_kind():
    st, law = velocity_state(lambda x: -0.1 * np.tanh(x))
    with pytest.raises(an.RangeError):
        an.check_blowup_hypothesis(st, law, SpaceTimeBuiltin("space_decay", 1, 2), "gradient_threshold")
    with pytest.raises(an.RangeError):
        an.check_blowup_hypothesis(st, law, PowerTime(1, 2), "space_time")


def test_weighted_prediction_leads_to_blowup():
    cfg = RunConfig(gamma=2, lam=1, mu=1, shape_psi="-0.9610582*odd_gaussian(0.04)",
                    x_left=-4, x_right=4, n_cells=4000, t_max=2.0)
    st0 = run(cfg.with_(t_max=1e-9)).initial
    verdict = an.check_blowup_hypothesis(st0, cfg.law(), cfg.damping_model(), "weighted_gradient")
    assert verdict.kind == "PredictsBlowup"
    assert run(cfg).event == "GradientBlowup"


def test_apriori_constant_state():
    cfg = RunConfig(epsilon=1.0, shape_psi="zero", x_left=-5, x_right=5, n_cells=64, t_max=5)
    rep = an.check_apriori(run(cfg))
    assert rep.passed
    assert rep["phi_norm_nonincreasing"].margin == pytest.approx(5 * 10 / 64)


def test_apriori_damped_gamma2():
    cfg = RunConfig(gamma=2, lam=1, mu=1, x_left=-25, x_right=25, n_cells=1000, t_max=15)
    traj = run(cfg)
    rep = an.check_apriori(traj)
    assert rep["phi_norm_nonincreasing"].passed and rep["psi_norm_nonincreasing"].passed
    assert rep["u_box"].passed and rep["u_power_envelope"].passed


def test_box_from_norms():
    law = PressureLaw(3)
    m1, d1 = an.box_from_norms(law, 0.5, 2.0, 1.0)
    assert m1 == pytest.approx(2.0) and d1 == pytest.approx(1.0)
    assert an.box_from_norms(law, 1.5, 2.0, 1.0)[0] == math.inf


def test_detect_blowup_constant_state():
    cfg = RunConfig(epsilon=1.0, shape_psi="zero", x_left=-5, x_right=5, n_cells=64, t_max=3)
    rep = an.detect_blowup(cfg, mesh_levels=2)
    assert rep.event == "HorizonReached" and rep.t_star_estimate == math.inf


def test_detect_blowup_reference_report():
    rep = an.detect_blowup(RunConfig(n_cells=1000), mesh_levels=3)
    assert rep.event == "GradientBlowup"
    samples = [t for _, t in rep.extrapolation]
    assert min(samples) <= rep.t_star_estimate <= max(samples)
    assert rep.t_star_estimate == pytest.approx(1 / an.REFERENCE_K, rel=0.02)
    assert all(flag["ok"] for flag in rep.bounded_confirmed.values())
    assert [m.n_cells for m in rep.meshes] == [1000, 2000, 4000]


def test_detect_blowup_inconsistent(monkeypatch):
    events = iter(["GradientBlowup", "HorizonReached"])
    real = an.run

    def fake(config, t_max=None):
        tr = real(config, t_max=t_max)
        tr.event = next(events)
        return tr

    monkeypatch.setattr(an, "run", fake)
    with pytest.raises(an.InconsistentClassification):
        an.detect_blowup(RunConfig(n_cells=200), mesh_levels=2)


def test_sweep_empty_and_scaling():
    assert an.estimate_lifespan_sweep(RunConfig(), []) == []
    base = RunConfig(n_cells=1000, x_left=-20, x_right=20)
    res = an.estimate_lifespan_sweep(base, [0.4, 0.2], t_max_factor=1.5, jobs=1)
    assert [e.epsilon for e in res] == [0.2, 0.4]
    assert res[0].t_star / res[1].t_star == pytest.approx(2.0, rel=0.05)
    lines = an.sweep_csv(res).splitlines()
    assert lines[0] == "epsilon,dx,t_star,event,witness_x" and len(lines) == 3


def test_sweep_records_errors_inline():
    res = an.estimate_lifespan_sweep(RunConfig(n_cells=200, x_left=-5, x_right=5), [0.1], jobs=1)
    assert res[0].report is None and "domain" in res[0].error
    assert "Error" in an.sweep_csv(res).splitlines()[1]
