from __future__ import annotations

import math

import numpy as np
import pytest

from slowlight.medium import (
    LinearRamp,
    MediumProfiles,
    MediumSpec,
    PhysicalConstants,
    ProfileDomainError,
    Step,
    Table,
    TanhRamp,
    Uniform,
    doppler,
    in_window,
    make_profile,
    susceptibility,
)


def test_default_medium_wavenumber():
    spec = MediumSpec()
    assert spec.k0 == pytest.approx(1.0e7, rel=1e-15)
    assert spec.c == 3.0e8


@pytest.mark.parametrize("kw", [{"omega0": 0.0}, {"omega0": -1.0}, {"epsilon": 0.0}, {"epsilon": 1.5}])
def test_medium_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        MediumSpec(**kw)


def test_constants_must_be_positive():
    with pytest.raises(ValueError):
        PhysicalConstants(c=-1.0)


def test_susceptibility_zero_at_resonance_and_linear():
    spec = MediumSpec()
    assert susceptibility(spec.omega0, spec, 300.0) == 0.0
    dw = 1e6
    chi = susceptibility(spec.omega0 + dw, spec, 300.0)
    assert chi == pytest.approx(2 * spec.c / 300.0 * dw / spec.omega0, rel=1e-12)
    with pytest.raises(ValueError):
        susceptibility(spec.omega0, spec, -1.0)


def test_doppler_shift_scalar_and_vector():
    w, k = doppler(3e15, 1e7, 100.0)
    assert w == 3e15 - 1e9 and k == 1e7
    w3, k3 = doppler(3e15, [1e7, 0.0, 0.0], [100.0, 5.0, 0.0])
    assert w3 == 3e15 - 1e9
    np.testing.assert_array_equal(k3, [1e7, 0.0, 0.0])


def test_in_window():
    spec = MediumSpec()
    edge = spec.epsilon * (300.0 / spec.c) * spec.omega0
    assert in_window(spec.omega0 + 0.5 * edge, spec, 300.0)
    assert not in_window(spec.omega0 + 2 * edge, spec, 300.0)


def test_uniform_profile():
    p = Uniform(298.5)
    assert p(0.1) == 298.5
    assert p.derivative(0.1) == 0.0
    np.testing.assert_array_equal(p(np.zeros(3)), [298.5] * 3)


@pytest.mark.parametrize("cls, kw", [
    (Step, dict(left=1.0, right=2.0, center=0.0, smoothing=1e-4)),
    (TanhRamp, dict(left=1.0, right=2.0, center=0.0, width=1e-4)),
    (LinearRamp, dict(left=1.0, right=2.0, z_start=-1e-4, z_end=1e-4)),
])
def test_transition_profiles_limits_and_derivative(cls, kw):
    p = cls(**kw)
    assert p(-1.0) == pytest.approx(1.0, abs=1e-12)
    assert p(1.0) == pytest.approx(2.0, abs=1e-12)
    lo, hi = p.bounds()
    assert lo == pytest.approx(1.0) and hi == pytest.approx(2.0)
    for z in (-5e-5, 0.0, 3e-5):
        h = 1e-9
        fd = (p(z + h) - p(z - h)) / (2 * h)
        assert p.derivative(z) == pytest.approx(fd, rel=1e-5)


def test_table_profile_interpolates_and_has_domain():
    z = np.linspace(0.0, 1e-3, 11)
    p = Table(tuple(z), tuple(300.0 - 1e3 * z))
    assert p(5e-4) == pytest.approx(299.5, rel=1e-12)
    assert p.derivative(5e-4) == pytest.approx(-1e3, rel=1e-9)
    with pytest.raises(ProfileDomainError):
        p(2e-3)


def test_make_profile_dispatch():
    assert isinstance(make_profile("tanh-ramp", left=1.0, right=2.0, center=0.0, width=1.0), TanhRamp)
    with pytest.raises(ValueError):
        make_profile("sawtooth")


def test_profiles_pair_check_rejects_nonpositive_group_velocity():
    spec = MediumSpec()
    MediumProfiles(Uniform(298.5), Uniform(300.0)).check(spec)
    with pytest.raises(ValueError):
        MediumProfiles(Uniform(0.0), Uniform(-1.0)).check(spec)


def test_nonfinite_z_rejected():
    with pytest.raises(ProfileDomainError):
        Uniform(1.0)(math.nan)
