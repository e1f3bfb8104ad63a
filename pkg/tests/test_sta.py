import math

import pytest
from support import run_double_integrator, settle_time

from safenav.sta import StaGains, StaState, SuperTwisting, control, surface, validate_gains

DEFAULT_GAINS = StaGains(k1=2.0, k2=0.5, slope=10.0)


def test_surface_zero():
    assert surface(0.0, 0.0, 3.0) == 0.0


def test_surface_on_manifold_pair():
    assert surface(1.0, -7.0, 7.0) == 0.0


def test_surface_value():
    assert surface(0.2, 0.1, 10.0) == pytest.approx(2.1)


def test_control_zero_surface_returns_feedforward():
    w, st = control(0.0, 0.37, DEFAULT_GAINS, StaState(), 1e-3)
    assert w == 0.37
    assert st.integral == 0.0


def test_control_first_step_is_proportional_only():
    w, st = control(1.0, 0.0, DEFAULT_GAINS, StaState(), 1e-3)
    assert w == pytest.approx(-2.0)
    assert st.integral == pytest.approx(1e-3)


def test_integral_enters_next_step():
    w, st = control(1.0, 0.0, DEFAULT_GAINS, StaState(integral=2.0), 1e-3)
    assert w == pytest.approx(-2.0 - 0.5 * 2.0)


def test_control_is_odd():
    st = StaState(integral=0.4)
    w1, s1 = control(0.3, 0.2, DEFAULT_GAINS, st, 1e-3)
    w2, s2 = control(-0.3, -0.2, DEFAULT_GAINS, StaState(integral=-0.4), 1e-3)
    assert w2 == pytest.approx(-w1)
    assert s2.integral == pytest.approx(-s1.integral)


def test_double_integrator_converges_with_sinusoidal_disturbance():
    t, sig = run_double_integrator(lambda t: 0.3 * math.sin(t), DEFAULT_GAINS, z0=(0.5, 0.0))
    assert settle_time(t, sig, 1e-3) < 5.0


def test_validate_default_gains():
    assert validate_gains(DEFAULT_GAINS, 0.4).ok


def test_validate_flags_proportional_gain():
    r = validate_gains(StaGains(k1=1.0, k2=0.5), 0.0)
    assert not r.ok
    assert any("k1" in v for v in r.violations)


def test_validate_flags_integral_gain():
    r = validate_gains(StaGains(k1=3.0, k2=0.1), 0.2)
    assert not r.ok
    assert any("k2 > L_delta" in v for v in r.violations)
    assert r.integral_margin == pytest.approx(-0.1)


def test_anti_windup_clamps_output():
    g = StaGains(2.0, 0.5, 10.0, bound=1.0)
    st = StaState()
    for _ in range(5000):
        w, st = control(5.0, 3.0, g, st, 1e-3)
        assert abs(w) <= 1.0
    # integral stays bounded by bound / k2
    assert abs(st.integral) <= 1.0 / 0.5 + 1e-12


def test_anti_windup_does_not_add_overshoot():
    # a large initial surface value drives the bounded output into saturation;
    # conditional integration must not overshoot more than the unbounded law
    bounded = StaGains(2.0, 0.5, 10.0, bound=2.0)
    t, sig_b = run_double_integrator(lambda t: 1.0, bounded, z0=(2.0, 0.0), duration=12.0)
    _, sig_u = run_double_integrator(lambda t: 1.0, DEFAULT_GAINS, z0=(2.0, 0.0), duration=12.0)
    assert -sig_b.min() <= -sig_u.min()
    assert settle_time(t, sig_b, 1e-3) < 10.0


def test_wrapper_reset():
    s = SuperTwisting(DEFAULT_GAINS)
    s.update(1.0, 0.0, 0.1)
    assert s.integral != 0.0
    s.reset()
    assert s.integral == 0.0
