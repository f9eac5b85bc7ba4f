"""Analytic reference signals and the comparison metrics used by acceptance tests.

Free-particle propagator, diffusion Green's function, two-source
superposition, sampled-signal comparison (error norms, sign agreement,
zero-crossing spacings), and convergence-order fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import UnitsConfig

__all__ = [
    "SampledSignal",
    "ComparisonReport",
    "feynman_free",
    "diffusion_green",
    "two_source_superposition",
    "zero_crossings",
    "compare",
    "fit_convergence_order",
    "local_minima",
]


@dataclass(frozen=True)
class SampledSignal:
    """A real-valued signal sampled on a strictly increasing grid."""

    x: np.ndarray
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values)
        if x.ndim != 1 or v.shape != x.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.iscomplexobj(v):
            raise ValueError("sampled signals are real; pass .real or a sign explicitly")
        if x.size >= 2 and not np.all(np.diff(x) > 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", np.asarray(v, dtype=float))


@dataclass
class ComparisonReport:
    """Error metrics between two sampled signals on a shared grid.

    l1/l2/linf are plain vector norms of the difference (symmetric in the
    two inputs); relative versions are the caller's business.
    crossing_spacing_error is the max relative difference of matched
    zero-crossing spacings, or None with insufficient_crossings set when
    either signal offers fewer than two crossings (no spacing to match).
    """

    l1: float
    l2: float
    linf: float
    sign_agreement_fraction: float
    zero_crossings_a: np.ndarray
    zero_crossings_b: np.ndarray
    crossing_spacing_error: float | None
    n_spacing_pairs: int
    insufficient_crossings: bool
    convergence_order: float | None = None


def feynman_free(x, t: float, units: UnitsConfig):
    """Free-particle propagator from the origin, exp(i m x^2 / 2t) / sqrt(2 pi i t / m).

    Principal branch, sqrt(i) = exp(i pi/4); |K| = sqrt(m / 2 pi t)
    independent of x.
    """
    if not (t > 0.0):
        raise ValueError(f"t must be positive, got {t}")
    m = units.mass
    x = np.asarray(x, dtype=float)
    phase = m * x * x / (2.0 * t) - 0.25 * math.pi
    return np.exp(1j * phase) / math.sqrt(2.0 * math.pi * t / m)


def diffusion_green(x, t: float, D: float):
    """Heat-kernel density exp(-x^2 / 4Dt) / sqrt(4 pi D t): unit mass, variance 2Dt."""
    if not (t > 0.0):
        raise ValueError(f"t must be positive, got {t}")
    if not (D > 0.0):
        raise ValueError(f"D must be positive, got {D}")
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / (4.0 * D * t)) / math.sqrt(4.0 * math.pi * D * t)


def two_source_superposition(x, t: float, a: float, units: UnitsConfig):
    """Coherent sum of propagators from sources at +/- a, and its intensity.

    Returns (amplitude, intensity).  The intensity is
    4 |K|^2 cos^2(m a x / t): nodes where m a x / t = pi/2 + k pi, hence
    equally spaced with spacing pi t / (m a).
    """
    x = np.asarray(x, dtype=float)
    amp = feynman_free(x - a, t, units) + feynman_free(x + a, t, units)
    return amp, np.abs(amp) ** 2


def _is_binary(values: np.ndarray) -> bool:
    return bool(np.all(np.isin(values, (-1.0, 0.0, 1.0))))


def zero_crossings(sig: SampledSignal) -> np.ndarray:
    """Zero-crossing positions of a sampled signal.

    Binary signals (values in {-1, 0, +1}): the crossing is the midpoint of
    the sign-change cell, the best available locator for a discontinuous
    signal.  Smooth signals: the root of the linear interpolant through the
    sign-change cell (the closed form that cell bisection converges to);
    exact zero samples count as crossings at their own grid point.
    """
    x, v = sig.x, sig.values
    if _is_binary(v):
        idx = np.nonzero(v[:-1] * v[1:] < 0)[0]
        return 0.5 * (x[idx] + x[idx + 1])
    out = []
    for i in range(v.size - 1):
        if v[i] == 0.0:
            out.append(x[i])
        elif v[i] * v[i + 1] < 0.0:
            out.append(x[i] - v[i] * (x[i + 1] - x[i]) / (v[i + 1] - v[i]))
    if v.size and v[-1] == 0.0:
        out.append(x[-1])
    return np.array(out, dtype=float)


def _matched_spacing_error(ca: np.ndarray, cb: np.ndarray):
    """Max relative difference of crossing spacings, matched by location.

    Spacings are functions of position (midpoint of each crossing pair);
    signal b's spacing profile is linearly interpolated at signal a's
    spacing midpoints.  Matching by location rather than by index is what
    a local-frequency comparison requires: a constant phase offset between
    two signals of equal local frequency shifts crossing indices but not
    the spacing profile.
    """
    if ca.size < 2 or cb.size < 2:
        return None, 0
    spa, mida = np.diff(ca), 0.5 * (ca[:-1] + ca[1:])
    spb, midb = np.diff(cb), 0.5 * (cb[:-1] + cb[1:])
    sel = (mida >= midb[0]) & (mida <= midb[-1])
    if not np.any(sel):
        return None, 0
    interp = np.interp(mida[sel], midb, spb)
    rel = np.abs(spa[sel] - interp) / interp
    return float(rel.max()), int(sel.sum())


def compare(a: SampledSignal, b: SampledSignal, mode: str = "aligned") -> ComparisonReport:
    """Compare two signals sampled on the identical grid.

    mode selects sign-agreement handling: "aligned" scores agreement after
    an optional global sign flip of b (the flip maximizing agreement),
    "raw" scores the signals as given.  Resampling onto a shared grid is
    the caller's job.
    """
    if mode not in ("aligned", "raw"):
        raise ValueError(f"mode must be 'aligned' or 'raw', got {mode!r}")
    if a.x.shape != b.x.shape or not np.array_equal(a.x, b.x):
        raise ValueError("signals must share an identical grid")

    diff = a.values - b.values
    l1 = float(np.sum(np.abs(diff)))
    l2 = float(np.sqrt(np.sum(diff * diff)))
    linf = float(np.max(np.abs(diff))) if diff.size else 0.0

    sa, sb = np.sign(a.values), np.sign(b.values)
    agree = float(np.mean(sa == sb)) if sa.size else 1.0
    if mode == "aligned":
        agree = max(agree, float(np.mean(sa == -sb)) if sa.size else 1.0)

    ca = zero_crossings(a)
    cb = zero_crossings(b)
    spacing_err, n_pairs = _matched_spacing_error(ca, cb)

    return ComparisonReport(
        l1=l1,
        l2=l2,
        linf=linf,
        sign_agreement_fraction=agree,
        zero_crossings_a=ca,
        zero_crossings_b=cb,
        crossing_spacing_error=spacing_err,
        n_spacing_pairs=n_pairs,
        insufficient_crossings=spacing_err is None,
    )


def fit_convergence_order(deltas, errors) -> float:
    """Least-squares slope of log(error) against log(delta).

    The empirical convergence order: error ~ C * delta**order gives a
    straight line in log-log with this slope.
    """
    deltas = np.asarray(deltas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if deltas.size != errors.size or deltas.size < 2:
        raise ValueError("need at least two (delta, error) pairs")
    if np.any(deltas <= 0) or np.any(errors <= 0):
        raise ValueError("deltas and errors must be positive")
    return float(np.polyfit(np.log(deltas), np.log(errors), 1)[0])


def local_minima(x, v) -> np.ndarray:
    """Positions of strict interior local minima of a sampled signal."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    core = (v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])
    return x[1:-1][core]
