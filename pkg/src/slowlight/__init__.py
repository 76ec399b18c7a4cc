"""Slow-light pulses in non-uniformly moving media: dispersion, rays and wave packets."""

__version__ = "0.1.0"

from .medium import (  # noqa: E402
    MediumProfiles,
    MediumSpec,
    PhysicalConstants,
    LinearRamp,
    Step,
    Table,
    TanhRamp,
    Uniform,
)
from .dispersion import Branch, EvanescentRegion, NoTurningPoint  # noqa: E402

__all__ = [
    "Branch", "EvanescentRegion", "LinearRamp", "MediumProfiles", "MediumSpec", "NoTurningPoint",
    "PhysicalConstants", "Step", "Table", "TanhRamp", "Uniform",
]
