from __future__ import annotations

import math

import numpy as np
import pytest

from slowlight.dispersion import Branch, resonant_detuning
from slowlight.medium import MediumProfiles, MediumSpec, TanhRamp, Uniform
from slowlight.wave import (
    CrankNicolsonStepper,
    FieldState,
    Grid1D,
    PacketSpec,
    SplitStepper,
    build_operator,
    centroid_velocity,
    choose_dt,
    evolve,
    gauge_phase,
    gauge_to_optical,
    init_packet,
    local_wavenumber,
    observables,
    reduced_carrier,
    spectral_spread,
    step_crank_nicolson,
    step_splitstep,
)

SPEC = MediumSpec()
VG = 300.0
U0 = 0.995 * VG
UNIFORM = MediumProfiles(Uniform(U0), Uniform(VG))


def test_grid_validation_and_axes():
    g = Grid1D(0.0, 1e-3, 64)
    assert g.dz == pytest.approx(1e-3 / 64)
    assert g.z[0] == 0.0 and len(g.z) == 64
    assert g.k_nyquist == pytest.approx(math.pi / g.dz)
    with pytest.raises(ValueError):
        Grid1D(0.0, 1e-3, 100)
    with pytest.raises(ValueError):
        Grid1D(1e-3, 0.0, 64)


def test_operator_coefficients():
    g = Grid1D(0.0, 4e-3, 256)
    op = build_operator(UNIFORM, SPEC, g)
    assert op.kappa == pytest.approx(VG * SPEC.c / (2 * SPEC.omega0), rel=1e-15)
    assert op.kappa == pytest.approx(1.5e-5, rel=1e-12)
    assert op.mass_report == pytest.approx(SPEC.constants.hbar * SPEC.omega0 / (VG * SPEC.c), rel=1e-15)
    assert np.all(op.potential == 0.0)


def test_operator_needs_reference_velocity_when_vg_varies():
    prof = MediumProfiles(Uniform(U0), TanhRamp(left=297.0, right=300.0, center=2e-3, width=2e-4))
    with pytest.raises(ValueError):
        build_operator(prof, SPEC, Grid1D(0.0, 4e-3, 256))
    op = build_operator(prof, SPEC, Grid1D(0.0, 4e-3, 256), v_g_ref=300.0)
    assert op.potential.min() == 0.0


def test_reduced_carrier_resonant():
    delta = resonant_detuning(U0, SPEC, Branch.MINUS)
    assert reduced_carrier(delta, U0, VG, SPEC, Branch.MINUS) == pytest.approx(-5e4, rel=1e-9)


def test_packet_normalisation_and_resolution_checks():
    g = Grid1D(0.0, 4e-3, 1024)
    st = init_packet(PacketSpec(2e-3, 1e-4, -5e4), g)
    assert st.norm == pytest.approx(1.0, rel=1e-12)
    row = observables(st)
    assert row["centroid"] == pytest.approx(2e-3, rel=1e-9)
    assert row["rms_width"] == pytest.approx(1e-4, rel=1e-6)
    with pytest.raises(ValueError):
        init_packet(PacketSpec(2e-3, 1e-6, 0.0), g)
    with pytest.raises(ValueError):
        init_packet(PacketSpec(2e-3, 1e-4, 2 * g.k_nyquist), g)


def test_local_wavenumber_of_plane_wave_packet():
    g = Grid1D(0.0, 4e-3, 1024)
    st = init_packet(PacketSpec(2e-3, 1e-4, -5e4), g)
    kl = local_wavenumber(st.psi, g)
    core = np.abs(g.z - 2e-3) < 1e-4
    np.testing.assert_allclose(kl[core], -5e4, rtol=1e-8)


def test_gauge_phase_uniform_flow():
    g = Grid1D(0.0, 4e-3, 512)
    ph = gauge_phase(UNIFORM, SPEC, g)
    np.testing.assert_allclose(ph, SPEC.k0 * U0 / VG * (g.z - g.z[0]), rtol=1e-12)
    st = init_packet(PacketSpec(2e-3, 2e-4, 0.0), g)
    np.testing.assert_allclose(np.abs(gauge_to_optical(st, UNIFORM, SPEC)), np.abs(st.psi))


def test_free_gaussian_spreading_law():
    # uniform potential: rms width follows sigma0 sqrt(1 + (kappa t / sigma0^2)^2)
    g = Grid1D(0.0, 8e-3, 4096)
    op = build_operator(UNIFORM, SPEC, g)
    s0 = 5e-5
    st = init_packet(PacketSpec(4e-3, s0, 0.0), g)
    t_end = 2e-4
    ser = evolve(st, op, t_end, 2e-5)
    for row in ser.rows:
        expect = s0 * math.sqrt(1 + (op.kappa * row["t"] / s0 ** 2) ** 2)
        assert row["rms_width"] == pytest.approx(expect, rel=1e-3)


def test_uniform_packet_moves_at_galilean_velocity():
    g = Grid1D(0.0, 4e-3, 2048)
    op = build_operator(UNIFORM, SPEC, g)
    delta = resonant_detuning(U0, SPEC, Branch.MINUS)
    st = init_packet(PacketSpec(3e-3, 1e-4, reduced_carrier(delta, U0, VG, SPEC, Branch.MINUS)), g)
    ser = evolve(st, op, 2e-4, 1e-5)
    assert centroid_velocity(ser, 0.0, 2e-4) == pytest.approx(-1.5, rel=1e-6)
    norm = ser.column("norm")
    assert np.max(np.abs(norm / norm[0] - 1)) < 1e-10


def test_steppers_agree_and_conserve_norm():
    g = Grid1D(0.0, 4e-3, 1024)
    prof = MediumProfiles(TanhRamp(left=U0 - 0.0076, right=U0, center=2e-3, width=1e-4), Uniform(VG))
    op = build_operator(prof, SPEC, g)
    st = init_packet(PacketSpec(2.4e-3, 1e-4, -5e4), g)
    a, b = st.copy(), st.copy()
    dt = 3e-9  # the default 4096-point step; both schemes are second order in dt
    ss, cn = SplitStepper(op, dt), CrankNicolsonStepper(op, dt)
    for _ in range(2000):
        ss(a)
        cn(b)
    assert np.linalg.norm(a.psi - b.psi) / np.linalg.norm(a.psi) < 1e-3
    assert b.norm == pytest.approx(1.0, abs=1e-12)
    assert a.norm == pytest.approx(1.0, abs=1e-12)


def test_functional_steppers_and_zero_step():
    g = Grid1D(0.0, 4e-3, 256)
    op = build_operator(UNIFORM, SPEC, g)
    st = init_packet(PacketSpec(2e-3, 2e-4, 0.0), g)
    before = st.psi.copy()
    step_crank_nicolson(st, op, 0.0)
    np.testing.assert_array_equal(st.psi, before)
    step_splitstep(st, op, op.stable_dt())
    assert isinstance(st, FieldState)


def test_choose_dt_divides_sample_interval():
    op = build_operator(UNIFORM, SPEC, Grid1D(0.0, 4e-3, 4096))
    dt, n = choose_dt(op, 5e-6)
    assert dt <= op.stable_dt() and dt * n == pytest.approx(5e-6, rel=1e-15)


def test_absorbing_boundary_removes_norm():
    g = Grid1D(0.0, 2e-3, 512)
    op = build_operator(UNIFORM, SPEC, g)
    st = init_packet(PacketSpec(0.4e-3, 1e-4, -5e4), g)
    ser = evolve(st, op, 4e-4, 1e-5, boundary="absorbing", mask_width=2e-4)
    last = ser.rows[-1]
    assert last["absorbed_norm"] > 0.5
    assert last["norm"] + last["absorbed_norm"] == pytest.approx(1.0, abs=1e-2)


def test_spectral_spread_of_gaussian():
    g = Grid1D(0.0, 4e-3, 2048)
    op = build_operator(UNIFORM, SPEC, g)
    st = init_packet(PacketSpec(2e-3, 1e-4, -5e4), g)
    sp = spectral_spread(st, op)
    assert sp["sigma_k"] == pytest.approx(1 / (2 * 1e-4), rel=1e-6)
    assert sp["k_mean"] == pytest.approx(-5e4, rel=1e-9)
    assert sp["bandwidth_hz"] > 0


def test_momentum_fractions():
    g = Grid1D(0.0, 4e-3, 1024)
    row = observables(init_packet(PacketSpec(2e-3, 1e-4, -5e4), g), z_ref=1e-3, launch_side=1)
    assert row["negative_momentum_fraction"] > 0.999
    assert row["reflected_fraction"] == pytest.approx(1.0, abs=1e-12)
