import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dcemirror.model import FockCutoffs, ModelParams
from dcemirror.semiclassical import MeanFieldState, integrate_mean_field, mean_field_rhs

CUT = FockCutoffs(4, 4)  # unused by the mean-field equations


def make_params(delta, omega_c):
    return ModelParams(delta=delta, omega_c=omega_c, cutoffs=CUT)


def test_trivial_fixed_point():
    p = make_params(3.0, 0.2)
    db, dn, dq = mean_field_rhs(MeanFieldState(0.0, 0.0, 0.0, 0.0), p)
    assert db == 0 and dn == 0 and dq == 0


def test_rhs_vacuum_field_unit_mirror():
    # b=1, n=0, q=0: only the spontaneous term drives q
    p = make_params(0.0, 0.3)
    db, dn, dq = mean_field_rhs(MeanFieldState(0.0, 1.0, 0.0, 0.0), p)
    assert db == 0
    assert dn == 0
    assert dq == pytest.approx(-2j * 0.3, abs=1e-15)


def test_rhs_direct_substitution_detuned():
    p = make_params(10.0, 0.1)
    db, dn, dq = mean_field_rhs(MeanFieldState(0.0, 1.0, 1.0, 0.0), p)
    assert dq == pytest.approx(-0.6j, abs=1e-14)


def test_n_derivative_is_real():
    rng = np.random.default_rng(4)
    p = make_params(5.0, 0.17)
    for _ in range(20):
        st = MeanFieldState(
            0.0,
            complex(*rng.standard_normal(2)) * 3,
            float(rng.uniform(0, 4)),
            complex(*rng.standard_normal(2)),
        )
        _, dn, _ = mean_field_rhs(st, p)
        assert abs(dn.imag) <= 1e-14 * max(1.0, abs(dn))


def test_decoupled_evolution_analytic():
    # omega_c = 0: b frozen, q ~ e^{(i delta - gamma) t}, n ~ e^{-gamma t}
    p = make_params(3.0, 0.0)
    times = np.linspace(0.0, 4.0, 9)
    res = integrate_mean_field(MeanFieldState(0.0, 2.0, 1.5, 0.3 + 0.1j), p, times)
    for st in res.states:
        t = st.time
        assert st.b == pytest.approx(2.0, abs=1e-9)
        assert st.n_a == pytest.approx(1.5 * np.exp(-t), abs=1e-7)
        assert st.q == pytest.approx((0.3 + 0.1j) * np.exp((3j - 1) * t), abs=1e-7)


def test_matches_scipy_reference():
    p = make_params(10.0, 0.1)
    times = np.linspace(0.0, 30.0, 7)
    res = integrate_mean_field(MeanFieldState(0.0, 4.0, 0.0, 0.0), p, times)

    def rhs(t, v):
        st = MeanFieldState(t, v[0] + 1j * v[1], v[2], v[3] + 1j * v[4])
        db, dn, dq = mean_field_rhs(st, p)
        return [db.real, db.imag, dn.real, dq.real, dq.imag]

    ref = solve_ivp(rhs, (0, 30.0), [4.0, 0.0, 0.0, 0.0, 0.0], t_eval=times,
                    rtol=1e-10, atol=1e-12)
    for i, st in enumerate(res.states):
        assert st.b == pytest.approx(ref.y[0, i] + 1j * ref.y[1, i], abs=1e-6)
        assert st.n_a == pytest.approx(ref.y[2, i], abs=1e-6)
        assert st.q == pytest.approx(ref.y[3, i] + 1j * ref.y[4, i], abs=1e-6)


def test_u1_covariance():
    p = make_params(4.0, 0.08)
    times = np.linspace(0.0, 20.0, 11)
    base = integrate_mean_field(MeanFieldState(0.0, 3.0, 0.0, 0.0), p, times).states
    phi = 1.1
    rot = integrate_mean_field(
        MeanFieldState(0.0, 3.0 * np.exp(1j * phi), 0.0, 0.0), p, times
    ).states
    for s0, s1 in zip(base, rot):
        assert s1.b == pytest.approx(s0.b * np.exp(1j * phi), abs=1e-8)
        assert s1.q == pytest.approx(s0.q * np.exp(1j * phi), abs=1e-8)
        assert s1.n_a == pytest.approx(s0.n_a, abs=1e-8)


def test_linear_limit_decay_rate():
    # |b| << 1: the amplitude decays at gamma_b_eff / 2
    from dcemirror.bo import gamma_b_eff

    from dcemirror.bo import n_a_ss, q_ss

    p = make_params(0.0, 0.05)
    times = np.linspace(0.0, 4.0, 41)
    # start on the adiabatic branch so the cavity build-up transient (a
    # gamma_a-rate effect independent of the coupling) does not pollute the
    # early fit window
    b0 = 0.05
    n0 = n_a_ss(b0, gamma_b_eff(0.05, 1.0, 0.0))
    res = integrate_mean_field(MeanFieldState(0.0, b0, n0, q_ss(b0, n0, p)), p, times)
    absb = np.array([abs(s.b) for s in res.states])
    sel = (times >= 2.0) & (times <= 4.0)
    slope = np.polyfit(times[sel], np.log(absb[sel]), 1)[0]
    expected = -0.5 * gamma_b_eff(0.05, 1.0, 0.0)
    assert slope == pytest.approx(expected, rel=0.05)


def test_breakdown_regime_flags_physicality():
    # far above the runaway threshold the factorized moments leave the
    # physical cone; the run continues and reports it
    p = make_params(0.0, 0.1)
    times = np.linspace(0.0, 40.0, 81)
    res = integrate_mean_field(MeanFieldState(0.0, 4.0, 0.0, 0.0), p, times)
    assert len(res.states) == 81
    assert np.isfinite([abs(s.b) for s in res.states]).all()
