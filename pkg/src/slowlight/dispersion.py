"""Closed-form slow-light dispersion in a moving medium.

All frequencies enter as the dimensionless detuning ``delta = (w - w0)/w0``
unless a function explicitly takes an absolute ``omega``. Keeping the offset
separate from ``w0 ~ 1e15 rad/s`` is what makes the 1e-12-level identities
below hold in double precision.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .medium import MediumSpec, doppler, susceptibility


class EvanescentRegion(ValueError):
    """No real wave vector: the discriminant is negative (classically forbidden)."""


class NoTurningPoint(ValueError):
    """The requested parameters admit no turning point."""


class Branch(enum.IntEnum):
    """Sign in front of the square root: propagation with (+) or against (-) the flow."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, Branch):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("+", "plus", "p", "+1", "1"):
                return cls.PLUS
            if key in ("-", "minus", "m", "-1"):
                return cls.MINUS
            raise ValueError(f"unrecognised branch {value!r}")
        if value in (1, -1):
            return cls(int(value))
        raise ValueError(f"unrecognised branch {value!r}")

    @property
    def label(self) -> str:
        return "plus" if self is Branch.PLUS else "minus"


class Regime(str, enum.Enum):
    PROPAGATING = "propagating"
    TURNING = "at-turning-point"
    EVANESCENT = "evanescent"
    OUT_OF_WINDOW = "out-of-window"


@dataclass(frozen=True)
class DispersionResult:
    delta: float
    u: float
    v_g: float
    branch: Branch
    regime: Regime
    in_local_window: bool
    k: float | None = None
    v: float | None = None


TURNING_TOL = 1e-12


def detuning(omega: float, spec: MediumSpec) -> float:
    return (omega - spec.omega0) / spec.omega0


def discriminant(delta, u, v_g, spec: MediumSpec):
    """D = 1 + 2(c/v_g) delta + u^2/v_g^2.

    Evaluated as ((v_g -/+ u)/v_g)^2 + 2(c/v_g)(delta +/- u/c), whichever
    resonance line is closer, so D stays accurate when the pulse is almost
    frozen (D ~ 1e-5 built from O(1) terms otherwise).
    """
    c = spec.c
    a = delta + u / c  # offset from the counter-propagating resonance
    b = delta - u / c  # offset from the co-propagating resonance
    da = ((v_g - u) / v_g) ** 2 + 2.0 * (c / v_g) * a
    db = ((v_g + u) / v_g) ** 2 + 2.0 * (c / v_g) * b
    return np.where(np.abs(a) <= np.abs(b), da, db) if np.ndim(da) else (da if abs(a) <= abs(b) else db)


def _checked_sqrt_d(delta, u, v_g, spec):
    if v_g <= 0:
        raise ValueError("v_g must be positive")
    d = discriminant(delta, u, v_g, spec)
    if d < 0:
        raise EvanescentRegion(f"discriminant {d:.3e} < 0 at delta={delta!r}, u={u!r}, v_g={v_g!r}")
    return math.sqrt(d)


def residual_full(k, omega, u, spec: MediumSpec, v_g):
    """Exact local dispersion k'^2 - (1 + chi(w')) w'^2/c^2, in 1/m^2."""
    omega_p, k_p = doppler(omega, k, u)
    chi = susceptibility(omega_p, spec, v_g)
    return k_p * k_p - (1.0 + chi) * (omega_p / spec.c) ** 2


def residual_slowlight(k, omega, u, spec: MediumSpec, v_g):
    """Slow-light approximation k^2 - k0^2 - (2 k0/v_g)(w - u k - w0), in 1/m^2."""
    if np.any(np.asarray(v_g) <= 0):
        raise ValueError("v_g must be positive")
    k0 = spec.k0
    return (k - k0) * (k + k0) - (2.0 * k0 / v_g) * ((omega - spec.omega0) - u * k)


def solve_wavevector(delta, u, v_g, spec: MediumSpec, branch) -> float:
    s = Branch.parse(branch)
    root = _checked_sqrt_d(delta, u, v_g, spec)
    return spec.k0 * (s * root - u / v_g)


def group_velocity_1d(delta, u, v_g, branch, spec: MediumSpec | None = None) -> float:
    s = Branch.parse(branch)
    return s * v_g * _checked_sqrt_d(delta, u, v_g, spec or MediumSpec())


def group_velocity_3d(k, u, v_g, spec: MediumSpec):
    """Slow-light velocity addition: v = v_g k/k0 + u (vectors)."""
    return v_g * np.asarray(k, dtype=float) / spec.k0 + np.asarray(u, dtype=float)


def resonant_detuning(u0, spec: MediumSpec, branch) -> float:
    """Detuning that puts a carrier of wave vector +/-k0 on resonance in flow u0."""
    if abs(u0) >= spec.c:
        raise ValueError("flow speed must stay below c")
    return Branch.parse(branch) * u0 / spec.c


def galilean_velocity(v_g, u0, branch) -> float:
    return Branch.parse(branch) * v_g + u0


def working_point_branch(u0, v_g, family) -> Branch:
    """Square-root branch that carries the k = +/-k0 working point.

    For the counter-propagating family (``family=-1``) the resonant carrier
    sits on the minus root only while u0 < v_g; for faster flow the same
    carrier is dragged downstream and lies on the plus root.
    """
    f = Branch.parse(family)
    return Branch.PLUS if f * v_g + u0 >= 0 else Branch.MINUS


def local_window_check(delta, u, v, v_g, spec: MediumSpec) -> bool:
    lhs = delta - (u / v_g) * (v - u) / spec.c
    return bool(abs(lhs) < spec.epsilon * v_g / spec.c)


def turning_flow_speed(u0, v_g) -> float:
    """Flow speed at which a counter-propagating pulse launched in u0 turns around."""
    if u0 < v_g / 2:
        raise NoTurningPoint(f"u0={u0} below v_g/2={v_g / 2}: the pulse never turns")
    return v_g * math.sqrt(2.0 * u0 / v_g - 1.0)


def turning_flow_speed_detuned(delta, v_g, spec: MediumSpec) -> float:
    """Same turning point written in terms of the detuning: v_g sqrt(-2 (c/v_g) delta - 1)."""
    arg = -2.0 * (spec.c / v_g) * delta - 1.0
    if arg < 0:
        raise NoTurningPoint(f"delta={delta} above -v_g/(2c): the pulse never turns")
    return v_g * math.sqrt(arg)


def turning_group_velocity_roots(delta, u0, spec: MediumSpec) -> tuple[float, float]:
    """Both roots of v_g^2 + 2 c delta v_g + u0^2 = 0, larger first."""
    c = spec.c
    a = -c * delta
    if delta >= 0 or a < abs(u0):
        raise NoTurningPoint(f"no real turning group velocity for delta={delta}, u0={u0}")
    # c^2 delta^2 - u0^2 factored to avoid cancellation near delta = -u0/c
    big = a + math.sqrt((a - abs(u0)) * (a + abs(u0)))
    return big, u0 * u0 / big


def turning_group_velocity(delta, u0, spec: MediumSpec) -> float:
    return turning_group_velocity_roots(delta, u0, spec)[0]


def classify_regime(delta, u, v_g, spec: MediumSpec, branch, tol: float = TURNING_TOL) -> Regime:
    return dispersion_query(delta, u, v_g, spec, branch, tol=tol).regime


def dispersion_query(delta, u, v_g, spec: MediumSpec, branch, tol: float = TURNING_TOL) -> DispersionResult:
    s = Branch.parse(branch)
    d = float(discriminant(delta, u, v_g, spec))
    if abs(d) <= tol:
        root = math.sqrt(max(d, 0.0))
        k = spec.k0 * (s * root - u / v_g)
        v = s * v_g * root
        ok = local_window_check(delta, u, v, v_g, spec)
        return DispersionResult(delta, u, v_g, s, Regime.TURNING, ok, k, v)
    if d < 0:
        return DispersionResult(delta, u, v_g, s, Regime.EVANESCENT, False)
    root = math.sqrt(d)
    k = spec.k0 * (s * root - u / v_g)
    v = s * v_g * root
    ok = local_window_check(delta, u, v, v_g, spec)
    regime = Regime.PROPAGATING if ok else Regime.OUT_OF_WINDOW
    return DispersionResult(delta, u, v_g, s, regime, ok, k, v)
