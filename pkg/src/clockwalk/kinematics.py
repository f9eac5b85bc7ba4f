"""Relativistic substrate: units, events, hinged worldlines, proper time.

Everything downstream consumes these primitives. Natural units throughout:
c = 1, action scale = 1, so lengths and times share one unit and the
particle mass is an inverse time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "UnitsConfig",
    "Event",
    "Segment",
    "HingedWorldline",
    "segment_proper_time",
    "worldline_proper_time",
    "endpoint",
    "reachable",
    "VELOCITY_GUARD",
]

# CLI-facing guard: sqrt(1 - v*v) loses all precision as |v| -> 1, so
# configuration layers reject |v| >= 1 - VELOCITY_GUARD.  The library
# itself only requires |v| < 1 strictly.
VELOCITY_GUARD = 1e-12


@dataclass(frozen=True)
class UnitsConfig:
    """Unit system pinned to the intrinsic clock period.

    The clock toggles twice per period, so its angular frequency is
    2*pi/T; that frequency is the particle mass in natural units.  The
    default period of 4 gives m = pi/2 and diffusion constant
    D = 1/(2m) = 1/pi.
    """

    compton_period: float = 4.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.compton_period) and self.compton_period > 0):
            raise ValueError(f"compton_period must be positive, got {self.compton_period}")

    @property
    def mass(self) -> float:
        return 2.0 * math.pi / self.compton_period

    @property
    def diffusion_constant(self) -> float:
        """D = 1/(2m) with the action scale set to 1."""
        return self.compton_period / (4.0 * math.pi)

    @property
    def half_period(self) -> float:
        """Duration of one parity cell (half a clock period)."""
        return 0.5 * self.compton_period


@dataclass(frozen=True)
class Event:
    """A point (x, t) in 1+1 dimensional spacetime."""

    x: float
    t: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.t)):
            raise ValueError(f"event coordinates must be finite, got ({self.x}, {self.t})")


@dataclass(frozen=True)
class Segment:
    """One inertial leg of a hinged worldline: constant velocity for a duration."""

    velocity: float
    duration: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.velocity) and abs(self.velocity) < 1.0):
            raise ValueError(f"segment velocity must satisfy |v| < 1, got {self.velocity}")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValueError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class HingedWorldline:
    """Piecewise-inertial path: an origin event plus ordered inertial segments.

    Velocity changes happen instantaneously at the hinge events between
    segments; there is no acceleration inside a segment.
    """

    origin: Event
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if len(self.segments) == 0:
            raise ValueError("worldline needs at least one segment")

    @property
    def coordinate_time(self) -> float:
        return sum(seg.duration for seg in self.segments)


def segment_proper_time(seg: Segment) -> float:
    """Proper time elapsed along one inertial segment, duration*sqrt(1 - v^2).

    Always <= duration, with equality exactly at v = 0 (time dilation).
    """
    v = seg.velocity
    return seg.duration * math.sqrt(1.0 - v * v)


def worldline_proper_time(w: HingedWorldline) -> float:
    """Total proper time along a hinged worldline (additive over segments)."""
    return sum(segment_proper_time(seg) for seg in w.segments)


def endpoint(w: HingedWorldline) -> Event:
    """Terminal event of the worldline."""
    x = w.origin.x
    t = w.origin.t
    for seg in w.segments:
        x += seg.velocity * seg.duration
        t += seg.duration
    return Event(x, t)


def reachable(frm: Event, to: Event) -> bool:
    """Whether `to` lies in the closed forward light cone of `frm`.

    The cone boundary |dx| = dt counts as reachable; this keeps validity
    masks closed sets and avoids empty-set edge cases at the cone.
    """
    dt = to.t - frm.t
    if dt <= 0.0:
        return False
    return abs(to.x - frm.x) <= dt
