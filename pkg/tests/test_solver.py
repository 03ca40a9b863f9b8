import math

import numpy as np
import pytest

from damped_euler_lab import _kernels
from damped_euler_lab.config import RunConfig
from damped_euler_lab.damping import NoDamping, PowerTime, SpaceTimeBuiltin
from damped_euler_lab.shapes import Shape
from damped_euler_lab.solver import (NG, ConfigError, FieldState, Grid1D, InitialDataFamily,
                                     SmallPerturbation, VacuumEvent, _Stepper, cfl_dt,
                                     make_initial, run, step)
from damped_euler_lab.thermo import PressureLaw


def family(eps=0.1, phi="zero", psi="gaussian", **kw):
    return InitialDataFamily(SmallPerturbation(eps, Shape.parse(phi), Shape.parse(psi)), **kw)


def uniform_state(u, v=0.0, gamma=3.0, n=64, dx=0.01):
    law = PressureLaw(gamma)
    grid = Grid1D(0.0, n * dx, n)
    u = np.broadcast_to(np.asarray(u, float), (n + 2 * NG,))
    r, s = law.to_riemann(u, v)
    return FieldState(0.0, grid, law, r, s)


def test_make_initial_unperturbed():
    law = PressureLaw(3)
    st = make_initial(family(eps=1e-300, psi="zero"), Grid1D(-5, 5, 32), law)
    assert np.all(st.u == 1) and np.all(st.v == 0)
    assert np.all(st.r == -1) and np.all(st.s == 1)


def test_make_initial_peak():
    st = make_initial(family(), Grid1D(-8, 8, 1601), PressureLaw(3))
    assert st.u.min() == 1.0
    k = int(np.argmax(st.v))
    assert st.v[k] == pytest.approx(0.1) and st.x[k] == pytest.approx(0.0, abs=1e-12)


def test_make_initial_rejects_vacuum_dip_and_small_grid():
    with pytest.raises(ConfigError):
        make_initial(family(eps=0.5, phi="-3*gaussian", psi="zero", delta0=0.1),
                     Grid1D(-8, 8, 64), PressureLaw(3))
    with pytest.raises(ConfigError):
        make_initial(family(psi="bump(4)"), Grid1D(-2, 2, 64), PressureLaw(3))


def test_cfl_dt_examples():
    assert cfl_dt(uniform_state(1.0), 0.4) == pytest.approx(0.004)
    assert cfl_dt(uniform_state(2.0), 0.4) == pytest.approx(0.016)
    mixed = np.where(np.arange(68) % 2, 1.0, 2.0)
    assert cfl_dt(uniform_state(mixed), 0.4) == pytest.approx(0.004)
    with pytest.raises(ConfigError):
        cfl_dt(uniform_state(1.0), 1.5)


@pytest.mark.parametrize("model", [NoDamping(), PowerTime(2, 1),
                                   SpaceTimeBuiltin("space_decay", 1, 2),
                                   SpaceTimeBuiltin("time_front", 3, 0.5)])
@pytest.mark.parametrize("compiled", [False, True])
def test_steady_state_preserved(model, compiled):
    law = PressureLaw(2)
    grid = Grid1D(-10, 10, 64)
    r, s = law.to_riemann(np.full(68, 1.7), 0.0)
    stepper = _Stepper(grid, law, model, compiled=compiled)
    r2, s2 = np.array(r), np.array(s)
    for k in range(50):
        r2, s2 = stepper.advance(r2, s2, 0.01 * k, 0.01)
    assert np.max(np.abs(r2 - r)) <= 1e-14 and np.max(np.abs(s2 - s)) <= 1e-14


def test_undamped_transport_keeps_constant_r():
    law = PressureLaw(3)
    grid = Grid1D(-10, 10, 400)
    x = grid.x_ext
    r = np.full(x.size, -1.0)
    s = 1.0 + 0.1 * np.exp(-x * x)
    st = FieldState(0.0, grid, law, r, s)
    for _ in range(20):
        st = step(st, NoDamping(), dt=cfl_dt(st, 0.4))
        assert np.max(np.abs(st.r + 1.0)) <= 1e-12


def test_uniform_damped_velocity_matches_ode():
    # uniform data: v_t = -a(t) v, so v(1) = 0.3 / A(1)^2 = 0.3 / 4 for lambda = 2, mu = 1
    cfg = RunConfig(gamma=2, lam=2, mu=1, epsilon=1.0, shape_psi="zero", v_minus=0.3,
                    x_left=-1, x_right=1, n_cells=200, t_max=1.0)
    traj = run(cfg)
    assert traj.event == "HorizonReached"
    assert np.max(np.abs(traj.final.v - 0.075)) <= 1e-6
    assert np.max(np.abs(traj.final.u - 1.0)) <= 1e-6


def test_dt_above_cfl_rejected():
    st = uniform_state(1.0)
    with pytest.raises(ConfigError):
        step(st, NoDamping(), dt=0.02)


def test_vacuum_event_raised():
    law = PressureLaw(3)
    grid = Grid1D(0, 1, 16)
    r = np.zeros(20)
    s = np.full(20, 1e-11)
    st = FieldState(0.0, grid, law, r, s)
    with pytest.raises(VacuumEvent):
        step(st, NoDamping(), dt=1e-30)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not available")
@pytest.mark.parametrize("limiter", ["minmod", "van_leer"])
@pytest.mark.parametrize("frame", [0.0, -1.0])
def test_compiled_kernel_matches_numpy(limiter, frame):
    law = PressureLaw(1.5)
    grid = Grid1D(-10, 10, 200, frame)
    x = grid.x_ext
    r, s = law.to_riemann(1 + 0.2 * np.exp(-x * x), 0.3 * np.sin(x) * np.exp(-0.1 * x * x))
    model = SpaceTimeBuiltin("time_front", 1.0, 1.5)
    a = _Stepper(grid, law, model, limiter=limiter, compiled=False)
    b = _Stepper(grid, law, model, limiter=limiter, compiled=True)
    ra, sa, rb, sb = r.copy(), s.copy(), r.copy(), s.copy()
    for k in range(30):
        ra, sa = a.advance(ra, sa, 0.02 * k, 0.02)
        rb, sb = b.advance(rb, sb, 0.02 * k, 0.02)
    assert np.max(np.abs(ra - rb)) <= 1e-13 and np.max(np.abs(sa - sb)) <= 1e-13
    assert a.scan(ra, sa) == pytest.approx(b.scan(rb, sb), rel=1e-12)


def test_second_order_convergence():
    # mean absolute error against a fine run; the max error is limiter-clipped at extrema
    def v_at(n):
        cfg = RunConfig(gamma=2, lam=1, mu=1, x_left=-12, x_right=12, n_cells=n, t_max=3.0,
                        record_interval=3.0)
        traj = run(cfg)
        return traj.final.x, traj.final.v

    xr, vr = v_at(6400)
    errs = [np.mean(np.abs(np.interp(x, xr, vr) - v)) for x, v in map(v_at, (400, 800, 1600))]
    assert errs[0] / errs[1] >= 3 and errs[1] / errs[2] >= 3


def test_undamped_invariant_range_nonexpanding():
    cfg = RunConfig(gamma=1.5, x_left=-20, x_right=20, n_cells=800, epsilon=0.2,
                    shape_phi="gaussian(2)", t_max=8)
    traj = run(cfg, snapshot_every=25)
    r0, s0 = traj.initial.r, traj.initial.s
    tol = traj.dx ** 2 * 8 * 10
    for st in traj.snapshots:
        assert st.r.min() >= r0.min() - tol and st.r.max() <= r0.max() + tol
        assert st.s.min() >= s0.min() - tol and st.s.max() <= s0.max() + tol


def test_run_constant_state_reaches_horizon():
    cfg = RunConfig(epsilon=1.0, shape_psi="zero", x_left=-5, x_right=5, n_cells=64, t_max=10)
    traj = run(cfg)
    assert traj.event == "HorizonReached" and traj.t_end == 10.0
    assert np.all(traj.column("max_grad_r") <= 1e-12) and np.all(traj.column("max_grad_s") <= 1e-12)
    assert traj.t[-1] == 10.0
    assert np.allclose(np.diff(traj.t), 0.1)


def test_reference_blowup_event_and_csv():
    cfg = RunConfig(n_cells=1000)
    traj = run(cfg)
    assert traj.event == "GradientBlowup"
    assert traj.t_end < 11.66
    text = traj.to_csv()
    lines = text.splitlines()
    assert lines[0] == "t,min_u,max_u,max_abs_v,max_grad_r,max_grad_s,phi_norm,psi_norm,max_abs_dp"
    assert lines[-1].startswith('{"event": "GradientBlowup"')
    assert run(cfg).to_csv() == text
