"""Medium description: constants, resonance parameters, spatial profiles.

Everything here is immutable. Profiles are callables ``p(z)`` that accept
scalars or numpy arrays and carry an analytic (or spline) derivative, which
the ray equations need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf


class ProfileDomainError(ValueError):
    """Raised when a profile is evaluated outside its declared z-range."""


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 3.0e8
    hbar: float = 1.054571817e-34

    def __post_init__(self):
        if not self.c > 0 or not self.hbar > 0:
            raise ValueError("physical constants must be positive")


@dataclass(frozen=True)
class MediumSpec:
    """Resonance frequency ``omega0`` (rad/s) and window parameter ``epsilon``."""

    omega0: float = 3.0e15
    epsilon: float = 1.0e-3
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def c(self) -> float:
        return self.constants.c

    @property
    def k0(self) -> float:
        return self.omega0 / self.constants.c


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """Base class for speed profiles u(z) or v_g(z) in m/s."""

    kind = "abstract"

    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def _check(self, z):
        lo, hi = self.domain
        zz = np.asarray(z, dtype=float)
        if np.any(~np.isfinite(zz)) or np.any(zz < lo) or np.any(zz > hi):
            raise ProfileDomainError(f"z outside profile domain [{lo}, {hi}]")
        return zz

    def __call__(self, z):
        zz = self._check(z)
        out = self._value(zz)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, z):
        zz = self._check(z)
        out = self._slope(zz)
        return float(out) if np.ndim(out) == 0 else out

    def bounds(self) -> tuple[float, float]:
        """Smallest and largest value the profile takes on its domain."""
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def _value(self, z):
        raise NotImplementedError

    def _slope(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(Profile):
    value: float
    kind = "uniform"

    def _value(self, z):
        return np.full_like(z, self.value, dtype=float) if z.ndim else self.value

    def _slope(self, z):
        return np.zeros_like(z, dtype=float) if z.ndim else 0.0

    def bounds(self):
        return (self.value, self.value)

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class Step(Profile):
    """Heaviside jump from ``left`` to ``right`` blurred by a Gaussian of
    standard deviation ``smoothing``."""

    left: float
    right: float
    center: float
    smoothing: float
    kind = "step"

    def __post_init__(self):
        if not self.smoothing > 0:
            raise ValueError("step profiles need a positive smoothing length")

    def _value(self, z):
        s = 0.5 * (1.0 + erf((z - self.center) / (math.sqrt(2.0) * self.smoothing)))
        return self.left + (self.right - self.left) * s

    def _slope(self, z):
        x = (z - self.center) / self.smoothing
        return (self.right - self.left) * np.exp(-0.5 * x * x) / (math.sqrt(2 * math.pi) * self.smoothing)

    def bounds(self):
        return (min(self.left, self.right), max(self.left, self.right))

    def params(self):
        return {"left": self.left, "right": self.right, "center": self.center, "smoothing": self.smoothing}


@dataclass(frozen=True)
class TanhRamp(Profile):
    left: float
    right: float
    center: float
    width: float
    kind = "tanh-ramp"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("tanh ramp width must be positive")

    def _value(self, z):
        th = np.tanh((z - self.center) / self.width)
        return 0.5 * (self.left + self.right) + 0.5 * (self.right - self.left) * th

    def _slope(self, z):
        th = np.tanh((z - self.center) / self.width)
        return 0.5 * (self.right - self.left) * (1.0 - th * th) / self.width

    def bounds(self):
        return (min(self.left, self.right), max(self.left, self.right))

    def params(self):
        return {"left": self.left, "right": self.right, "center": self.center, "width": self.width}


@dataclass(frozen=True)
class LinearRamp(Profile):
    """Constant ``left`` below ``z_start``, constant ``right`` above ``z_end``,
    linear in between (continuous but only C0 at the corners)."""

    left: float
    right: float
    z_start: float
    z_end: float
    kind = "linear-ramp"

    def __post_init__(self):
        if not self.z_end > self.z_start:
            raise ValueError("linear ramp needs z_end > z_start")

    def _value(self, z):
        s = np.clip((z - self.z_start) / (self.z_end - self.z_start), 0.0, 1.0)
        return self.left + (self.right - self.left) * s

    def _slope(self, z):
        inside = (z > self.z_start) & (z < self.z_end)
        return np.where(inside, (self.right - self.left) / (self.z_end - self.z_start), 0.0)

    def bounds(self):
        return (min(self.left, self.right), max(self.left, self.right))

    def params(self):
        return {"left": self.left, "right": self.right, "z_start": self.z_start, "z_end": self.z_end}


@dataclass(frozen=True)
class Table(Profile):
    """Tabulated samples joined by a cubic spline (not-a-knot ends)."""

    z: tuple
    values: tuple
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    kind = "table"

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if z.ndim != 1 or z.shape != v.shape or z.size < 4:
            raise ValueError("table profile needs matching 1D z/value arrays with at least 4 points")
        if np.any(np.diff(z) <= 0):
            raise ValueError("table z samples must be strictly increasing")
        object.__setattr__(self, "z", tuple(z.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))
        object.__setattr__(self, "_spline", CubicSpline(z, v))

    @property
    def domain(self):
        return (self.z[0], self.z[-1])

    def _value(self, z):
        return self._spline(z)

    def _slope(self, z):
        return self._spline(z, 1)

    def bounds(self):
        zz = np.linspace(self.z[0], self.z[-1], 20 * len(self.z))
        vv = self._spline(zz)
        return (float(vv.min()), float(vv.max()))

    def params(self):
        return {"z": list(self.z), "values": list(self.values)}


PROFILE_KINDS = {
    cls.kind: cls for cls in (Uniform, Step, TanhRamp, LinearRamp, Table)
}


def make_profile(kind: str, **params) -> Profile:
    try:
        cls = PROFILE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown profile kind {kind!r}; expected one of {sorted(PROFILE_KINDS)}") from None
    return cls(**params)


def eval_profile(p: Profile, z):
    return p(z)


@dataclass(frozen=True)
class MediumProfiles:
    """Flow profile u(z) paired with group-velocity profile v_g(z)."""

    flow: Profile
    group_velocity: Profile

    def check(self, spec: MediumSpec) -> None:
        c = spec.c
        vlo, vhi = self.group_velocity.bounds()
        if not vlo > 0:
            raise ValueError(f"group velocity must stay positive, minimum is {vlo}")
        ulo, uhi = self.flow.bounds()
        if max(abs(ulo), abs(uhi), vhi) >= c:
            raise ValueError("profile speeds must stay below c")

    @property
    def domain(self) -> tuple[float, float]:
        a, b = self.flow.domain, self.group_velocity.domain
        return (max(a[0], b[0]), min(a[1], b[1]))


# ---------------------------------------------------------------------------
# local optics


def susceptibility(omega_prime, spec: MediumSpec, v_g):
    """Linear slope of the susceptibility around resonance, 2(c/v_g)(w'-w0)/w0."""
    if np.any(np.asarray(v_g) <= 0):
        raise ValueError("v_g must be positive")
    return (2.0 * spec.c / v_g) * (omega_prime - spec.omega0) / spec.omega0


def doppler(omega, k, u):
    """Frequency seen by the locally co-moving medium.

    Returns ``(omega_prime, k_prime)``; the wave vector is unchanged.
    ``k`` and ``u`` may be scalars (1D) or equal-length vectors.
    """
    k_arr = np.asarray(k, dtype=float)
    u_arr = np.asarray(u, dtype=float)
    if k_arr.ndim == 0:
        return omega - float(u_arr) * float(k_arr), k
    return omega - float(np.dot(u_arr, k_arr)), k


def in_window(omega_prime, spec: MediumSpec, v_g) -> bool:
    """True when the co-moving frequency lies inside the linear-susceptibility window."""
    if v_g <= 0:
        raise ValueError("v_g must be positive")
    return abs(omega_prime - spec.omega0) < spec.epsilon * (v_g / spec.c) * spec.omega0
