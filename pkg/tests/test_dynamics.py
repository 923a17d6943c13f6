import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmeta.dynamics import (
    Integrator,
    Recorder,
    StabilityError,
    field_acceleration,
    lattice_frequency,
    lattice_wavenumber,
    qubit_rhs,
    run,
    site_energy,
    step,
    total_field_energy,
)
from qmeta.model import LatticeLayout, MediumParams, QubitParams, SimState
from qmeta.pulses import PulseSpec, add_pulse

Q = QubitParams()
M = MediumParams()
SMALL = LatticeLayout(40, 10, 30)


def test_uniform_field_acceleration():
    s = SimState.ground(SMALL)
    s.a[:] = 0.3
    acc = field_acceleration(s, SMALL, M, Q)
    expected = -M.r * math.sin(0.3) * Q.d00 / Q.E_J
    np.testing.assert_allclose(acc[12:28], expected, rtol=1e-12)
    np.testing.assert_allclose(acc[1:9], 0.0, atol=1e-15)
    np.testing.assert_allclose(acc[31:39], 0.0, atol=1e-15)


def test_zero_field_no_acceleration():
    s = SimState.ground(SMALL)
    s.c1[:] = 0.6
    s.c0[:] = 0.8
    assert np.all(field_acceleration(s, SMALL, M, Q) == 0.0)


def test_single_bump_stencil():
    s = SimState.ground(SMALL)
    s.a[5] = 0.01
    acc = field_acceleration(s, SMALL, M, Q)
    assert acc[4] == pytest.approx(M.u_tilde**2 * 0.01)
    assert acc[6] == pytest.approx(M.u_tilde**2 * 0.01)
    assert acc[5] == pytest.approx(-2 * M.u_tilde**2 * 0.01)


def test_fixed_ends():
    s = SimState.ground(SMALL)
    s.a[0] = 0.01
    acc = field_acceleration(s, SMALL, M, Q)
    assert acc[0] == pytest.approx(-2 * M.u_tilde**2 * 0.01)


def test_qubit_rhs_zero_field():
    d0, d1 = qubit_rhs(0.0, 0.6, 0.8j, 1.3, Q)
    assert d0 == 0 and d1 == 0


def test_qubit_rhs_ground_state():
    a = 0.2
    d0, d1 = qubit_rhs(a, 1.0, 0.0, 0.0, Q)
    assert d1 == pytest.approx(-1j * a * a * Q.d01)
    assert d0 == pytest.approx(-1j * a * a * Q.d00)


@given(
    st.floats(-1, 1),
    st.floats(0, math.pi),
    st.floats(0, 2 * math.pi),
    st.floats(-100, 100),
)
def test_qubit_rhs_preserves_norm(a, theta, phi, t):
    c0 = math.cos(theta)
    c1 = math.sin(theta) * complex(math.cos(phi), math.sin(phi))
    d0, d1 = qubit_rhs(a, c0, c1, t, Q)
    dnorm = 2 * (np.conj(c0) * d0).real + 2 * (np.conj(c1) * d1).real
    assert abs(dnorm) < 1e-12


def test_cfl_checked_at_construction():
    with pytest.raises(StabilityError):
        Integrator(SMALL, M, Q, 0.26)
    with pytest.raises(StabilityError):
        Integrator(SMALL, MediumParams(v_tilde=0.5, u_tilde=0.5), Q, 0.2)
    with pytest.raises(StabilityError):
        Integrator(SMALL, M, Q, 0.0)
    with pytest.raises(ValueError):
        Integrator(SMALL, M, Q, 0.05, order=3)
    Integrator(SMALL, M, Q, 0.1)


def test_zero_field_step_only_advances_clock():
    s = SimState.ground(SMALL)
    s.c0[:] = 0.6
    s.c1[:] = 0.8j
    out = step(s, 0.05, SMALL, M, Q)
    assert out.t == pytest.approx(0.05)
    np.testing.assert_array_equal(out.c0, s.c0)
    np.testing.assert_array_equal(out.c1, s.c1)
    assert np.all(out.a == 0)


def _pulsed(layout, A=0.1, z0=None, direction="right", k=2 * math.pi / 25):
    z0 = layout.n_total / 2 if z0 is None else z0
    spec = PulseSpec(A, k, M.v_tilde * k, 60.0, z0, 0.0, direction)
    return add_pulse(SimState.ground(layout), spec, layout)


def test_run_zero_steps():
    s = _pulsed(SMALL)
    out = run(s, s.t, 0.05, SMALL, M, Q)
    np.testing.assert_array_equal(out.a, s.a)
    assert out.t == s.t


def test_run_rejects_past():
    s = SimState.ground(SMALL)
    s.t = 5.0
    with pytest.raises(ValueError):
        run(s, 1.0, 0.05, SMALL, M, Q)


def test_run_split_equals_single_run():
    lay = LatticeLayout(300, 100, 200)
    s = _pulsed(lay, A=0.15, z0=100.0)
    integ = Integrator(lay, M, Q, 0.05)
    direct = integ.run(s, 10.0)
    split = integ.run(integ.run(s, 4.0), 10.0)
    np.testing.assert_allclose(split.a, direct.a, rtol=0, atol=1e-13)
    np.testing.assert_allclose(split.c1, direct.c1, rtol=0, atol=1e-13)


def test_deterministic():
    lay = LatticeLayout(300, 100, 200)
    s = _pulsed(lay, A=0.15, z0=100.0)
    a = run(s, 5.0, 0.05, lay, M, Q)
    b = run(s, 5.0, 0.05, lay, M, Q)
    assert np.array_equal(a.a, b.a) and np.array_equal(a.c1, b.c1)


def test_recorder_stride_and_rows():
    lay = LatticeLayout(30, 10, 20)
    rec = Recorder(stride=4)
    run(_pulsed(lay, z0=15.0), 1.0, 0.05, lay, M, Q, recorder=rec)
    assert len(rec.times) == 6  # steps 0, 4, ..., 20
    rows = list(rec.rows(lay))
    assert len(rows) == 6 * 30
    t, n, a, p = rows[3]
    assert n == 3 and p == 0.0
    with pytest.raises(ValueError):
        Recorder(stride=0)


def test_passive_energy_conserved():
    lay = LatticeLayout(3000, 2800, 2900)
    m = MediumParams(r=0.0)
    s = _pulsed(lay, A=0.1, z0=800.0)
    e0 = total_field_energy(s, lay, m)
    out = run(s, 500.0, 0.05, lay, m, Q, order=2)
    assert abs(total_field_energy(out, lay, m) - e0) / e0 < 1e-4


def test_site_energy_sums_to_total():
    s = _pulsed(SMALL, z0=20.0)
    assert np.sum(site_energy(s.a, s.a_dot, SMALL, M)) == pytest.approx(total_field_energy(s, SMALL, M))


def _centroid(state, layout, m):
    e = site_energy(state.a, state.a_dot, layout, m)
    return float(np.sum(layout.z * e) / np.sum(e))


@pytest.mark.parametrize("direction", ["right", "left"])
def test_reciprocal_propagation(direction):
    lay = LatticeLayout(2000, 1950, 1960)
    m = MediumParams(r=0.0)
    z0 = 700.0 if direction == "right" else 1300.0
    s = _pulsed(lay, A=0.05, z0=z0, direction=direction)
    out = run(s, 200.0, 0.05, lay, m, Q, order=2)
    speed = abs(_centroid(out, lay, m) - _centroid(s, lay, m)) / 200.0
    k = 2 * math.pi / 25
    group = m.u_tilde * math.cos(k / 2)
    assert speed == pytest.approx(group, rel=2e-3)
    assert speed == pytest.approx(m.u_tilde, rel=0.01)


def test_klein_gordon_dispersion_with_frozen_ground_qubits():
    n = 600
    lay = LatticeLayout(n + 2, 1, n + 1)
    wavelength = 20.0
    j = round(2 * (n + 1) / wavelength)
    k = math.pi * j / (n + 1)
    s = SimState.ground(lay)
    s.a = 1e-4 * np.sin(k * lay.z)
    integ = Integrator(lay, M, Q, 0.02, order=2, frozen=True)
    rec = Recorder(stride=1)
    integ.run(s, 200.0, rec)
    probe = np.array([f[lay.n_total // 2 + 3] for f in rec.fields])
    t = np.array(rec.times)
    crossings = t[:-1][np.sign(probe[:-1]) != np.sign(probe[1:])]
    omega = math.pi * (len(crossings) - 1) / (crossings[-1] - crossings[0])
    continuum = math.sqrt(M.v_tilde**2 * k * k + M.r / Q.E_J * Q.d00)
    assert omega == pytest.approx(continuum, rel=0.01)


def test_lattice_dispersion_roundtrip():
    k = lattice_wavenumber(0.5, 1.99, 0.05)
    assert lattice_frequency(k, 1.99, 0.05) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        lattice_wavenumber(5.0, 1.99)


def _quasi_cw():
    lay = LatticeLayout(1024, 384, 640)
    k = 2 * math.pi / 25
    s = SimState.ground(lay)
    for direction in ("right", "left"):
        s = add_pulse(s, PulseSpec(0.18, k, M.v_tilde * k, 1000.0, lay.center, 0.0, direction), lay)
    return lay, s


def test_halving_dt_changes_populations_little():
    lay, s = _quasi_cw()
    a = run(s, 50.0, 0.02, lay, M, Q)
    b = run(s, 50.0, 0.01, lay, M, Q)
    assert np.max(np.abs(np.abs(a.c1) - np.abs(b.c1))) < 1e-4


def test_magnus_is_unitary_and_rk4_agrees():
    lay, s = _quasi_cw()
    mag = Integrator(lay, M, Q, 0.02).run(s, 30.0)
    rk4 = Integrator(lay, M, Q, 0.02, qubit_scheme="rk4").run(s, 30.0)
    assert mag.norm_error() < 1e-12
    assert rk4.norm_error() < 1e-8
    assert np.max(np.abs(mag.c1 - rk4.c1)) < 1e-6


def test_frozen_mode_keeps_amplitudes():
    lay, s = _quasi_cw()
    s.c0[:] = 0.8
    s.c1[:] = 0.6
    out = Integrator(lay, M, Q, 0.05, frozen=True).run(s, 5.0)
    np.testing.assert_array_equal(out.c1, s.c1)
    assert not np.array_equal(out.a, s.a)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.3), st.floats(0.0, 2 * math.pi))
def test_norm_conserved_for_random_drives(A, phi0):
    lay = LatticeLayout(200, 60, 140)
    k = 2 * math.pi / 25
    s = SimState.ground(lay)
    s = add_pulse(s, PulseSpec(A, k, M.v_tilde * k, 40.0, 100.0, phi0), lay)
    out = run(s, 5.0, 0.05, lay, M, Q)
    assert out.norm_error() < 1e-12
