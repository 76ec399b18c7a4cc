"""Geometric-optics ray tracing through stationary flow and group-velocity profiles.

A ray is a point (z, k) moving under the Hamiltonian w(k, z) of the
slow-light dispersion relation; w is conserved along the ray, so a ray
launched against the flow turns around wherever its local group velocity
vanishes. The integrator is an embedded Dormand-Prince 5(4) pair with
step-size control and bisection-refined events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import Branch, EvanescentRegion, discriminant, local_window_check, solve_wavevector
from .medium import MediumProfiles, MediumSpec


class StepFailure(RuntimeError):
    """Adaptive stepping could not meet the requested tolerance."""


class NoTurningEvent(ValueError):
    """The trajectory does not describe a single bounce back to its launch point."""


@dataclass(frozen=True)
class RayState:
    z: float
    k: float
    t: float = 0.0
    phase: float = 0.0  # accumulated integral of k dz along the ray, rad


@dataclass(frozen=True)
class RayEvent:
    kind: str  # turning-point | window-exit | domain-exit | return
    t: float
    z: float
    k: float


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-6
    rel_tol: float = 1e-10
    max_steps: int = 200_000
    event_refine_tol: float = 1e-10
    max_step: float = math.inf
    max_turns: int | None = 1
    stop_on_return: bool = False
    adaptive: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not self.event_refine_tol > 0:
            raise ValueError("event_refine_tol must be positive")


@dataclass
class RayTrajectory:
    """Ordered ray samples plus the events met on the way.

    ``omega_offset`` is the conserved w - w0 in rad/s; ``omega_drift`` holds
    the per-sample relative deviation (w(k, z) - w_launch)/w_launch.
    Phase convention: integral of the signed k against dz, no constant
    (Maslov-type) offset added at turning points.
    """

    samples: list[RayState]
    omega0: float
    omega_offset: float
    events: list[RayEvent] = field(default_factory=list)
    omega_drift: np.ndarray | None = None
    phase_integrated: bool = True
    launch_z: float | None = None

    @property
    def omega(self) -> float:
        return self.omega0 + self.omega_offset

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def z(self) -> np.ndarray:
        return np.array([s.z for s in self.samples])

    @property
    def k(self) -> np.ndarray:
        return np.array([s.k for s in self.samples])

    @property
    def phase(self) -> np.ndarray:
        return np.array([s.phase for s in self.samples])

    def events_of(self, kind: str) -> list[RayEvent]:
        return [e for e in self.events if e.kind == kind]

    @property
    def final(self) -> RayState:
        return self.samples[-1]


# ---------------------------------------------------------------------------
# Hamiltonian


def frequency_offset(k, z, profiles: MediumProfiles, spec: MediumSpec):
    """w(k, z) - w0 = u k + (v_g/2k0)(k^2 - k0^2), without the w0 cancellation."""
    k0 = spec.k0
    u = profiles.flow(z)
    vg = profiles.group_velocity(z)
    return u * k + (vg / (2.0 * k0)) * (k - k0) * (k + k0)


def hamiltonian_frequency(k, z, profiles: MediumProfiles, spec: MediumSpec):
    return spec.omega0 + frequency_offset(k, z, profiles, spec)


def ray_derivatives(s: RayState, profiles: MediumProfiles, spec: MediumSpec) -> tuple[float, float]:
    """(dz/dt, dk/dt) from Hamilton's equations."""
    dz, dk = _rhs_zk(s.z, s.k, profiles, spec)
    return dz, dk


def _rhs_zk(z, k, profiles, spec):
    k0 = spec.k0
    u = profiles.flow(z)
    vg = profiles.group_velocity(z)
    du = profiles.flow.derivative(z)
    dvg = profiles.group_velocity.derivative(z)
    dz = u + vg * k / k0
    dk = -du * k - dvg * (k - k0) * (k + k0) / (2.0 * k0)
    return dz, dk


def launch_ray(z: float, delta: float, branch, profiles: MediumProfiles, spec: MediumSpec,
               t: float = 0.0) -> tuple[RayState, float]:
    """On-shell launch state at detuning ``delta``; returns (state, omega)."""
    k = solve_wavevector(delta, profiles.flow(z), profiles.group_velocity(z), spec, Branch.parse(branch))
    return RayState(z=z, k=k, t=t), spec.omega0 * (1.0 + delta)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class _System:
    def __init__(self, profiles, spec):
        self.profiles = profiles
        self.spec = spec

    def __call__(self, y):
        dz, dk = _rhs_zk(y[0], y[1], self.profiles, self.spec)
        return np.array([dz, dk, y[1] * dz])

    def step(self, y, f0, h):
        """One DP step; returns (y5, error estimate, f at y5)."""
        ks = [f0]
        for i in range(1, 7):
            yi = y + h * sum(a * kk for a, kk in zip(_A[i], ks))
            ks.append(self(yi))
        kmat = np.array(ks)
        y5 = y + h * (_B5 @ kmat)
        err = h * (_E @ kmat)
        return y5, err, ks[-1]


def _err_norm(err, y, y_new, rel_tol, z_scale):
    scale = np.array([
        rel_tol * max(abs(y[0]), abs(y_new[0]), z_scale),
        rel_tol * max(abs(y[1]), abs(y_new[1]), 1.0),
        rel_tol * max(abs(y[2]), abs(y_new[2]), 1.0),
    ])
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def trace(initial: RayState, omega: float | None, profiles: MediumProfiles, cfg: IntegratorConfig,
          spec: MediumSpec, t_end: float | None = None,
          z_bounds: tuple[float, float] | None = None) -> RayTrajectory:
    """Integrate a ray from ``initial`` until an exit condition.

    Stops at domain exit, ``t_end`` (which may lie before ``initial.t`` for
    backward integration), after ``cfg.max_turns`` turning points, at the
    first return to the launch z when ``cfg.stop_on_return`` is set, or
    after ``cfg.max_steps`` steps.
    """
    k0 = spec.k0
    z_lo, z_hi = z_bounds if z_bounds is not None else profiles.domain
    offset = float(frequency_offset(initial.k, initial.z, profiles, spec))
    if omega is not None:
        if abs((omega - spec.omega0) - offset) > cfg.rel_tol * abs(omega):
            raise ValueError("initial state is not on-shell at the requested frequency")
    u0 = profiles.flow(initial.z)
    vg0 = profiles.group_velocity(initial.z)
    if discriminant(offset / spec.omega0, u0, vg0, spec) < 0:
        raise EvanescentRegion("evanescent-launch: no real wave vector at the launch point")

    direction = 1.0
    if t_end is not None and t_end < initial.t:
        direction = -1.0
    omega_launch = spec.omega0 + offset

    system = _System(profiles, spec)
    y = np.array([initial.z, initial.k, initial.phase])
    t = initial.t
    f = system(y)
    h = cfg.dt
    z_scale = max(abs(z_hi - z_lo) if math.isfinite(z_hi - z_lo) else 0.0, abs(initial.z), 1e-6)

    samples = [initial]
    events: list[RayEvent] = []
    turns = 0

    def window_ok(yy, ff):
        z = yy[0]
        return local_window_check(offset / spec.omega0, profiles.flow(z), ff[0],
                                  profiles.group_velocity(z), spec)

    in_win = window_ok(y, f)

    def refine(y_a, f_a, t_a, h_full, crossed):
        """Bisect inside a step for the first point where ``crossed`` flips."""
        lo, hi = 0.0, 1.0
        y_hi = system.step(y_a, f_a, h_full)[0]
        y_lo = y_a
        for _ in range(200):
            if abs(y_hi[0] - y_lo[0]) <= cfg.event_refine_tol and (hi - lo) < 1e-9:
                break
            mid = 0.5 * (lo + hi)
            y_mid, _, f_mid = system.step(y_a, f_a, mid * h_full)
            if crossed(y_mid, f_mid):
                hi, y_hi = mid, y_mid
            else:
                lo, y_lo = mid, y_mid
        return hi, y_hi

    def as_state(tt, yy):
        return RayState(z=float(yy[0]), k=float(yy[1]), t=float(tt), phase=float(yy[2]))

    steps = 0
    done = False
    while not done:
        if steps >= cfg.max_steps:
            break
        h = min(h, cfg.max_step)
        if t_end is not None:
            remaining = (t_end - t) * direction
            if remaining <= 0:
                break
            h = min(h, remaining)
        hs = direction * h
        y_new, err, f_new = system.step(y, f, hs)
        if cfg.adaptive:
            en = _err_norm(err, y, y_new, cfg.rel_tol, z_scale)
            if not np.all(np.isfinite(y_new)) or not en <= 1.0:
                h *= max(0.1, 0.9 * en ** -0.2) if np.isfinite(en) else 0.1
                if h < 1e-14 * max(abs(t), cfg.dt):
                    raise StepFailure(f"step size underflow at t={t:.6e}, z={y[0]:.6e}")
                continue
        steps += 1
        t_new = t + hs

        stop_frac = None
        stop_kind = None
        # domain exit
        if not (z_lo <= y_new[0] <= z_hi):
            frac, y_ev = refine(y, f, t, hs, lambda yy, ff: not (z_lo <= yy[0] <= z_hi))
            stop_frac, stop_kind = frac, ("domain-exit", y_ev)
        # turning point: sign change of dz/dt
        if f[0] * f_new[0] < 0 or (f_new[0] == 0.0 and f[0] != 0.0):
            s0 = math.copysign(1.0, f[0])
            frac, y_ev = refine(y, f, t, hs, lambda yy, ff: ff[0] * s0 <= 0)
            if stop_frac is None or frac < stop_frac:
                f_ev = system(y_ev)
                events.append(RayEvent("turning-point", t + frac * hs, float(y_ev[0]), float(y_ev[1])))
                samples.append(as_state(t + frac * hs, y_ev))
                turns += 1
                if cfg.max_turns is not None and turns >= cfg.max_turns and not cfg.stop_on_return:
                    stop_frac, stop_kind = frac, None
        # return to launch point after a bounce
        if turns > 0 and stop_frac is None:
            zl = initial.z
            if (y[0] - zl) * (y_new[0] - zl) < 0 or y_new[0] == zl:
                sgn = math.copysign(1.0, y[0] - zl)
                frac, y_ev = refine(y, f, t, hs, lambda yy, ff: (yy[0] - zl) * sgn <= 0)
                events.append(RayEvent("return", t + frac * hs, float(y_ev[0]), float(y_ev[1])))
                if cfg.stop_on_return:
                    stop_frac, stop_kind = frac, ("return", y_ev)

        if stop_frac is not None:
            if stop_kind is not None:
                kind, y_ev = stop_kind
                if kind == "domain-exit":
                    events.append(RayEvent(kind, t + stop_frac * hs, float(y_ev[0]), float(y_ev[1])))
                if samples[-1].t != t + stop_frac * hs:
                    samples.append(as_state(t + stop_frac * hs, y_ev))
            done = True
        else:
            now_in = window_ok(y_new, f_new)
            if in_win and not now_in:
                events.append(RayEvent("window-exit", t_new, float(y_new[0]), float(y_new[1])))
            in_win = now_in
            y, f, t = y_new, f_new, t_new
            samples.append(as_state(t, y))

        if cfg.adaptive:
            en = max(en, 1e-10)
            h = h * min(5.0, max(0.2, 0.9 * en ** -0.2))

    z_arr = np.array([s.z for s in samples])
    k_arr = np.array([s.k for s in samples])
    drift = (frequency_offset(k_arr, z_arr, profiles, spec) - offset) / omega_launch
    return RayTrajectory(samples=samples, omega0=spec.omega0, omega_offset=offset, events=events,
                         omega_drift=np.asarray(drift), phase_integrated=True, launch_z=initial.z)


def semiclassical_phase(traj: RayTrajectory) -> float:
    """Closed-loop phase (integral of k dz) of a ray that bounced once.

    Trajectories produced by :func:`trace` carry the phase as an integrated
    state variable; hand-built ones fall back to trapezoidal accumulation
    over the samples. The end point is pulled back onto the launch z to
    first order, since dphase/dz = k is of order 1e7 rad/m.
    """
    if len(traj.samples) <= 1:
        return 0.0
    turning = traj.events_of("turning-point")
    if len(turning) != 1:
        raise NoTurningEvent(f"expected exactly one turning event, found {len(turning)}")
    first, last = traj.samples[0], traj.samples[-1]
    z_launch = traj.launch_z if traj.launch_z is not None else first.z
    if traj.phase_integrated:
        phase = last.phase - first.phase
    else:
        z, k = traj.z, traj.k
        phase = float(np.sum(0.5 * (k[1:] + k[:-1]) * np.diff(z)))
    gap = z_launch - last.z
    tol = 1e-6 * max(abs(z_launch), 1e-3)
    if abs(gap) > tol:
        raise NoTurningEvent(f"trajectory ends {gap:.3e} m away from the launch point")
    return float(phase + last.k * gap)
