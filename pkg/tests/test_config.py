import math

import pytest

from damped_euler_lab.config import (ConfigErrors, REFERENCE_K, RunConfig, load_config,
                                     parse_config)


def test_gamma_only_gives_defaults():
    cfg = parse_config("gamma = 3\n")
    assert cfg == RunConfig()
    assert cfg.gamma == 3.0 and cfg.lam == 0.0 and cfg.epsilon == 0.1


def test_empty_config_is_the_reference_problem():
    cfg = parse_config("")
    assert cfg.shape_psi == "gaussian" and cfg.shape_phi == "zero"
    assert cfg.threshold("K") == pytest.approx(REFERENCE_K)
    assert 1 / REFERENCE_K == pytest.approx(11.6583, abs=1e-4)


def test_gamma_must_exceed_one():
    with pytest.raises(ConfigErrors) as exc:
        parse_config("gamma = 0.5")
    assert "gamma must exceed 1" in exc.value.errors


def test_n_cells_lower_bound():
    with pytest.raises(ConfigErrors) as exc:
        parse_config("grid.n_cells = 7")
    assert any("n_cells ≥ 16" in e for e in exc.value.errors)


def test_all_errors_reported_with_line_numbers():
    text = "gamma = 3\n# comment\nbogus = 1\nepsilon = -1\nt_max = abc\ngamma = 2\nnot a pair\n"
    with pytest.raises(ConfigErrors) as exc:
        parse_config(text)
    errs = exc.value.errors
    assert any(e.startswith("line 3: unknown key 'bogus'") for e in errs)
    assert any(e.startswith("line 5: bad value for t_max") for e in errs)
    assert any(e.startswith("line 6: duplicate key 'gamma'") for e in errs)
    assert any(e.startswith("line 7:") for e in errs)
    assert "epsilon must be positive" in errs


def test_domain_too_small_for_t_max():
    with pytest.raises(ConfigErrors) as exc:
        parse_config("t_max = 100\n")
    assert any("domain too small" in e for e in exc.value.errors)


def test_parse_all_keys_and_roundtrip():
    text = """
gamma = 2
lambda = 1
mu = 2
damping.kind = power_time
epsilon = 0.05
shape.phi = zero
shape.psi = 0.9610582*odd_gaussian(4)
u_minus = 1
v_minus = 0
delta0 = 0.2
grid.x_left = -56
grid.x_right = 36
grid.n_cells = 1000
grid.frame_speed = -1
cfl = 0.3
t_max = 20
record_interval = 0.5
gradient_threshold = auto
vacuum_floor = 1e-9
limiter = minmod
sweep.epsilons = 0.1, 0.2
sweep.mesh_levels = 3
analysis.thresholds = K:0.2, kappa:3
output.dir = out
"""
    cfg = parse_config(text)
    assert cfg.frame_speed == -1.0 and cfg.limiter == "minmod"
    assert cfg.sweep_epsilons == (0.1, 0.2)
    assert cfg.threshold("K") == 0.2 and cfg.threshold("kappa") == 3.0
    assert cfg.gradient_threshold is None
    assert parse_config(cfg.to_text()) == cfg


def test_overrides_replace_file_values(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("gamma = 2\nepsilon = 0.2\n")
    cfg = load_config(str(p), overrides="epsilon=0.3")
    assert cfg.gamma == 2 and cfg.epsilon == 0.3


def test_smallness_default():
    cfg = parse_config("gamma = 2\nu_minus = 4\n")
    assert cfg.smallness() == pytest.approx(0.5)


def test_damping_models():
    assert type(parse_config("lambda = 1").damping_model()).__name__ == "PowerTime"
    assert type(parse_config("").damping_model()).__name__ == "NoDamping"
    m = parse_config("damping.kind = space_decay\nlambda = 1\nmu = 2").damping_model()
    assert m.eval(0.0, 1.0)[0] == pytest.approx(0.25)
    with pytest.raises(ConfigErrors):
        parse_config("damping.kind = tabulated")
    with pytest.raises(ConfigErrors):
        parse_config("damping.kind = wobbly")
