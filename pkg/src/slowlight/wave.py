"""Wave-optics layer: reduced Schrodinger evolution of 1D slow-light packets.

After removing the flow's vector potential by a gauge phase, the envelope
psi obeys

    i dpsi/dt = -kappa d^2psi/dz^2 + (W(z) - omega_ref) psi,

with kappa = v_g c / (2 w0) and W(z) = (w0/2)(2 - v_g/c - u^2/(v_g c)).
hbar never enters the dynamics; the effective mass is reported only.
Two steppers share the same generator: a Strang split-step Fourier scheme
(periodic) and a Crank-Nicolson scheme on a 3-point stencil.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import solve_banded

from .dispersion import Branch, EvanescentRegion, discriminant
from .medium import MediumProfiles, MediumSpec


@dataclass(frozen=True)
class Grid1D:
    z_min: float
    z_max: float
    n: int

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.z_max > self.z_min:
            raise ValueError("grid needs z_max > z_min")

    @property
    def length(self) -> float:
        return self.z_max - self.z_min

    @property
    def dz(self) -> float:
        return self.length / self.n

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.dz * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dz)

    @property
    def k_nyquist(self) -> float:
        return np.pi / self.dz


@dataclass(frozen=True)
class EffectiveOperator:
    """Discretised generator. ``potential`` is W - omega_ref (rad/s, min 0)."""

    kappa: float
    potential: np.ndarray = field(repr=False)
    omega_ref: float
    mass_report: float
    grid: Grid1D

    @property
    def W(self) -> np.ndarray:
        return self.potential + self.omega_ref

    def stable_dt(self, courant: float = 0.5) -> float:
        """Time step with kappa * k_nyquist^2 * dt = courant."""
        return courant / (self.kappa * self.grid.k_nyquist ** 2)


@dataclass
class FieldState:
    psi: np.ndarray
    grid: Grid1D
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(self.psi.copy(), self.grid, self.t)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dz)


@dataclass(frozen=True)
class PacketSpec:
    z_center: float
    sigma: float
    k_carrier: float
    norm: float = 1.0


def potential_offset(profiles: MediumProfiles, spec: MediumSpec, z) -> np.ndarray:
    """W(z) - w0, evaluated without forming the 1e15-sized sum."""
    u = profiles.flow(z)
    vg = profiles.group_velocity(z)
    return -(spec.omega0 / (2.0 * spec.c)) * (vg + u * u / vg)


def build_operator(profiles: MediumProfiles, spec: MediumSpec, grid: Grid1D,
                   v_g_ref: float | None = None) -> EffectiveOperator:
    """Effective operator on ``grid``.

    The kinetic coefficient uses a single reference group velocity; when
    v_g varies across the grid it must be supplied (the launch-region
    value), and the v_g variation is carried by W alone.
    """
    z = grid.z
    vg = np.asarray(profiles.group_velocity(z), dtype=float)
    if np.any(vg <= 0):
        raise ValueError("group velocity must be positive on the whole grid")
    if v_g_ref is None:
        if np.ptp(vg) > 0:
            raise ValueError("v_g varies over the grid; pass v_g_ref (launch-region value)")
        v_g_ref = float(vg[0])
    if not v_g_ref > 0:
        raise ValueError("v_g_ref must be positive")
    w_off = potential_offset(profiles, spec, z)
    w_min = float(np.min(w_off))
    kappa = v_g_ref * spec.c / (2.0 * spec.omega0)
    mass = spec.constants.hbar * spec.omega0 / (v_g_ref * spec.c)
    return EffectiveOperator(kappa=kappa, potential=w_off - w_min, omega_ref=spec.omega0 + w_min,
                             mass_report=mass, grid=grid)


def reduced_carrier(delta, u, v_g, spec: MediumSpec, branch) -> float:
    """Carrier wave number of psi: k_branch + k0 u/v_g = +/- k0 sqrt(D)."""
    d = float(discriminant(delta, u, v_g, spec))
    if d < 0:
        raise EvanescentRegion("no real carrier at the launch point")
    return Branch.parse(branch) * spec.k0 * math.sqrt(d)


def gauge_phase(profiles: MediumProfiles, spec: MediumSpec, grid: Grid1D) -> np.ndarray:
    """k0 * integral_{z_min}^{z} u/v_g dz' (trapezoid)."""
    z = grid.z
    ratio = np.asarray(profiles.flow(z), dtype=float) / np.asarray(profiles.group_velocity(z), dtype=float)
    return spec.k0 * cumulative_trapezoid(ratio, z, initial=0.0)


def gauge_to_optical(state: FieldState, profiles: MediumProfiles, spec: MediumSpec) -> np.ndarray:
    return state.psi * np.exp(-1j * gauge_phase(profiles, spec, state.grid))


def local_wavenumber(psi: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Phase gradient Im(psi* dpsi/dz)/|psi|^2 with a spectral derivative."""
    dpsi = np.fft.ifft(1j * grid.k * np.fft.fft(psi))
    dens = np.abs(psi) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.imag(np.conj(psi) * dpsi) / dens


def init_packet(packet: PacketSpec, grid: Grid1D, t: float = 0.0) -> FieldState:
    if packet.sigma < 4 * grid.dz:
        raise ValueError(f"sigma={packet.sigma} under-resolved: needs >= 4 dz = {4 * grid.dz}")
    if abs(packet.k_carrier) >= grid.k_nyquist:
        raise ValueError(f"carrier {packet.k_carrier} beyond Nyquist {grid.k_nyquist}")
    z = grid.z
    psi = np.exp(-((z - packet.z_center) ** 2) / (4 * packet.sigma ** 2) + 1j * packet.k_carrier * z)
    psi *= math.sqrt(packet.norm / (np.sum(np.abs(psi) ** 2) * grid.dz))
    return FieldState(psi.astype(complex), grid, t)


# ---------------------------------------------------------------------------
# steppers


class SplitStepper:
    """Strang splitting: half potential kick, exact kinetic drift in k-space, half kick."""

    def __init__(self, op: EffectiveOperator, dt: float):
        self.op, self.dt = op, dt
        self.half_kick = np.exp(-0.5j * op.potential * dt)
        self.drift = np.exp(-1j * op.kappa * op.grid.k ** 2 * dt)

    def __call__(self, state: FieldState) -> FieldState:
        psi = state.psi
        psi *= self.half_kick
        spec = np.fft.fft(psi)
        spec *= self.drift
        psi[:] = np.fft.ifft(spec)
        psi *= self.half_kick
        state.t += self.dt
        return state


class CrankNicolsonStepper:
    """Cayley form (1 + iH dt/2) psi' = (1 - iH dt/2) psi on a periodic 3-point stencil.

    The cyclic tridiagonal system is reduced to a banded one with the
    Sherman-Morrison correction for the two corner entries.
    """

    def __init__(self, op: EffectiveOperator, dt: float):
        self.op, self.dt = op, dt
        n, dz = op.grid.n, op.grid.dz
        off = -op.kappa / dz ** 2
        self.diag_h = 2 * op.kappa / dz ** 2 + op.potential
        self.off_h = off
        a = 0.5j * dt
        diag = 1 + a * self.diag_h
        lower = upper = a * off
        # corner entries A[0, n-1] = upper, A[n-1, 0] = lower
        gamma = -diag[0]
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = upper
        ab[1] = diag
        ab[1, 0] = diag[0] - gamma
        ab[1, -1] = diag[-1] - upper * lower / gamma
        ab[2, :-1] = lower
        self._ab = ab
        u = np.zeros(n, dtype=complex)
        u[0], u[-1] = gamma, lower
        self._zcorr = solve_banded((1, 1), ab, u)
        self._alpha, self._gamma = upper, gamma
        self._a = a

    def apply_h(self, psi: np.ndarray) -> np.ndarray:
        return self.diag_h * psi + self.off_h * (np.roll(psi, 1) + np.roll(psi, -1))

    def __call__(self, state: FieldState) -> FieldState:
        psi = state.psi
        rhs = psi - self._a * self.apply_h(psi)
        x = solve_banded((1, 1), self._ab, rhs, check_finite=False)
        zc = self._zcorr
        fac = (x[0] + self._alpha * x[-1] / self._gamma) / (1 + zc[0] + self._alpha * zc[-1] / self._gamma)
        psi[:] = x - fac * zc
        state.t += self.dt
        return state


def step_splitstep(state: FieldState, op: EffectiveOperator, dt: float) -> FieldState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    return SplitStepper(op, dt)(state)


def step_crank_nicolson(state: FieldState, op: EffectiveOperator, dt: float) -> FieldState:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state
    return CrankNicolsonStepper(op, dt)(state)


STEPPERS = {"split-step": SplitStepper, "crank-nicolson": CrankNicolsonStepper}


# ---------------------------------------------------------------------------
# observables


OBSERVABLE_COLUMNS = (
    "t", "norm", "centroid", "rms_width", "reflected_fraction", "transmitted_fraction",
    "positive_momentum_fraction", "negative_momentum_fraction", "absorbed_norm",
)


@dataclass
class ObservableSeries:
    rows: list[dict] = field(default_factory=list)
    z_ref: float | None = None
    launch_side: int = 1

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def __len__(self):
        return len(self.rows)


def observables(state: FieldState, z_ref: float | None = None, launch_side: int = 1) -> dict:
    """One row of packet diagnostics.

    ``reflected_fraction`` is the share of the norm on the launch side of
    ``z_ref`` (``launch_side`` = +1 means launched at z > z_ref). The
    momentum fractions split |psi(k)|^2 by the sign of the reduced wave
    number, i.e. by direction of motion.
    """
    grid = state.grid
    z, dz = grid.z, grid.dz
    dens = np.abs(state.psi) ** 2
    norm = float(np.sum(dens) * dz)
    centroid = float(np.sum(z * dens) * dz / norm)
    width = float(math.sqrt(max(np.sum((z - centroid) ** 2 * dens) * dz / norm, 0.0)))
    if z_ref is None:
        z_ref = centroid
    on_launch = (z > z_ref) if launch_side > 0 else (z < z_ref)
    reflected = float(np.sum(dens[on_launch]) * dz / norm)
    power = np.abs(np.fft.fft(state.psi)) ** 2
    k = grid.k
    total = float(np.sum(power))
    pos = float(np.sum(power[k > 0]) + 0.5 * power[k == 0].sum()) / total
    return {
        "t": state.t,
        "norm": norm,
        "centroid": centroid,
        "rms_width": width,
        "reflected_fraction": min(max(reflected, 0.0), 1.0),
        "transmitted_fraction": min(max(1.0 - reflected, 0.0), 1.0),
        "positive_momentum_fraction": min(max(pos, 0.0), 1.0),
        "negative_momentum_fraction": min(max(1.0 - pos, 0.0), 1.0),
    }


def spectral_spread(state: FieldState, op: EffectiveOperator) -> dict:
    """Realised spectral content: rms wave-number width and rms frequency width."""
    power = np.abs(np.fft.fft(state.psi)) ** 2
    power /= power.sum()
    k = state.grid.k
    k_mean = float(np.sum(k * power))
    sigma_k = float(math.sqrt(np.sum((k - k_mean) ** 2 * power)))
    w = op.kappa * k ** 2
    w_mean = float(np.sum(w * power))
    sigma_w = float(math.sqrt(np.sum((w - w_mean) ** 2 * power)))
    return {"k_mean": k_mean, "sigma_k": sigma_k, "sigma_omega": sigma_w,
            "bandwidth_hz": sigma_w / (2 * math.pi)}


def absorbing_mask(grid: Grid1D, width: float, rate: float, dt: float) -> np.ndarray:
    """Per-step damping factor exp(-rate dt s^2), s the depth into an edge layer."""
    z = grid.z
    depth = np.maximum(np.maximum(grid.z_min + width - z, z - (grid.z_max - width)), 0.0) / width
    return np.exp(-rate * dt * depth ** 2)


def choose_dt(op: EffectiveOperator, sample_every: float, dt_max: float | None = None) -> tuple[float, int]:
    """Largest dt <= dt_max that divides ``sample_every`` evenly."""
    dt_max = op.stable_dt() if dt_max is None else dt_max
    per_sample = max(1, math.ceil(sample_every / dt_max - 1e-9))
    return sample_every / per_sample, per_sample


def evolve(state: FieldState, op: EffectiveOperator, t_end: float, sample_every: float,
           boundary: str = "periodic", *, dt: float | None = None, stepper: str = "split-step",
           mask_width: float | None = None, absorb_rate: float = 1e5,
           z_ref: float | None = None, launch_side: int = 1,
           snapshot_every: int | None = None, on_snapshot=None) -> ObservableSeries:
    """Step ``state`` in place to ``t_end`` and record observables.

    ``dt`` is an upper bound; the actual step divides ``sample_every``.
    With ``boundary="absorbing"`` a smooth edge mask of ``mask_width``
    damps outgoing waves each step and the removed norm is accumulated in
    the ``absorbed_norm`` column. ``on_snapshot(state)`` is called every
    ``snapshot_every`` samples.
    """
    if not t_end > state.t:
        raise ValueError("t_end must lie after the current time")
    step_dt, per_sample = choose_dt(op, sample_every, dt)
    step = STEPPERS[stepper](op, step_dt)
    mask = None
    if boundary == "absorbing":
        mask = absorbing_mask(op.grid, mask_width or 0.05 * op.grid.length, absorb_rate, step_dt)
    elif boundary != "periodic":
        raise ValueError(f"unknown boundary {boundary!r}")

    n_samples = max(1, round((t_end - state.t) / sample_every))
    t0 = state.t
    series = ObservableSeries(z_ref=z_ref, launch_side=launch_side)
    absorbed = 0.0
    dz = op.grid.dz

    def record(i):
        row = observables(state, z_ref, launch_side)
        row["absorbed_norm"] = absorbed
        series.rows.append(row)
        if on_snapshot is not None and snapshot_every and i % snapshot_every == 0:
            on_snapshot(state)

    record(0)
    for i in range(1, n_samples + 1):
        for _ in range(per_sample):
            step(state)
            if mask is not None:
                before = np.sum(np.abs(state.psi) ** 2)
                state.psi *= mask
                absorbed += float(before - np.sum(np.abs(state.psi) ** 2)) * dz
        state.t = t0 + i * sample_every  # kill accumulated rounding in t
        record(i)
    return series


def centroid_velocity(series: ObservableSeries, t_start: float, t_stop: float) -> float:
    """Least-squares slope of the centroid over [t_start, t_stop]."""
    t = series.column("t")
    c = series.column("centroid")
    sel = (t >= t_start - 1e-15) & (t <= t_stop + 1e-15)
    if sel.sum() < 2:
        raise ValueError("fewer than two samples in the fitting window")
    return float(np.polyfit(t[sel], c[sel], 1)[0])
