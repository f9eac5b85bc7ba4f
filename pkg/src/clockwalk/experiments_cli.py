"""Command-line experiment runner emitting CSV/JSON artifacts with a manifest.

Each subcommand configures one scenario, validates every parameter before
touching the filesystem, computes, writes plain data tables plus a
report.json (flat metrics with a nested reproducibility manifest), and
gates CI via exit codes: 0 success, 2 configuration failure, 3 numerical
check failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .clock_signal import (
    PatternSample,
    SlitGeometry,
    double_slit_intensity,
    double_slit_phi,
    plane_pattern,
)
from .kinematics import UnitsConfig
from .lattice_walk import (
    SQRT2,
    DecomposedField,
    LatticeParams,
    decompose,
    compose,
    deposit_standard_errors,
    evolve,
    field_variance,
    monte_carlo_estimate,
    phi_step,
    point_source_phi,
    point_source_z,
    unit_state_field,
    z_step,
)
from .reference_solutions import (
    SampledSignal,
    compare,
    diffusion_green,
    feynman_free,
    fit_convergence_order,
    local_minima,
    two_source_superposition,
)
from .spectral_limit import (
    PSI_DENSITY_CALIBRATION,
    assemble_psi,
    continuum_propagator,
    eigenvalue_leading_order,
    eigenvalues,
    fresnel_kernel,
    momentum_grid,
    stroboscopic_power,
    transfer_matrix,
)

__all__ = [
    "main",
    "run_scenario",
    "ConfigError",
    "schrodinger_levels",
    "diffusion_levels",
    "validate_level_sequence",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_CHECK",
    "EXIT_IO",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3
EXIT_IO = 4


class ConfigError(ValueError):
    """Raised for any invalid configuration before any file is written."""


# ---------------------------------------------------------------------------
# config plumbing


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _parse_alpha(s: str) -> float:
    v = s.strip().lower()
    if v == "sqrt2":
        return SQRT2
    try:
        a = float(s)
    except ValueError as exc:
        raise ConfigError(f"alpha must be a number or 'sqrt2', got {s!r}") from exc
    return a


def _parse_float_list(s: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in s.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {s!r}") from exc
    if not vals:
        raise ConfigError(f"expected a non-empty list, got {s!r}")
    return vals


def _parse_choice(*choices: str):
    def parse(s: str) -> str:
        if s not in choices:
            raise ConfigError(f"expected one of {choices}, got {s!r}")
        return s

    return parse


# Per-scenario configuration schema: key -> (parser, default as string).
# All defaults are illustrative desk-scale choices, echoed into the
# manifest; none of them is ground truth.
SCHEMAS: dict[str, dict[str, tuple]] = {
    "clock-pattern": {
        "t": (float, "20.0"),
        "compton_period": (float, "4.0"),
        "x_min": (float, "-25.0"),
        "x_max": (float, "25.0"),
        "x_step": (float, "0.05"),
        "raster_t_min": (float, "0.5"),
        "raster_t_max": (float, "25.0"),
        "raster_t_step": (float, "0.5"),
    },
    "propagator-compare": {
        "t": (float, "20.0"),
        "compton_period": (float, "4.0"),
        "x_window": (float, "4.0"),
        "x_step": (float, "0.01"),
        "min_sign_agreement": (float, "0.95"),
        "max_spacing_rel": (float, "0.10"),
        "alignment": (_parse_choice("aligned", "raw"), "aligned"),
    },
    "double-slit": {
        "half_separation": (float, "4.0"),
        "source_to_slit_time": (float, "8.0"),
        "slit_to_screen_time": (float, "40.0"),
        "compton_period": (float, "4.0"),
        "x_min": (float, "-30.0"),
        "x_max": (float, "30.0"),
        "x_step": (float, "0.05"),
        "node_tolerance": (float, "0.01"),
    },
    "lattice-evolve": {
        "delta": (float, "0.1"),
        "diffusion": (float, "0.5"),
        "alpha": (_parse_alpha, "1.0"),
        "n_steps": (int, "64"),
        "snapshot_every": (int, "8"),
        "site_count": (int, "0"),
        "init": (_parse_choice("unit_state", "phi_point", "z_point"), "unit_state"),
        "initial_state": (int, "1"),
        "initial_site": (int, "-1"),
        "stroboscopic": (_parse_bool, "false"),
        "mc_paths": (int, "0"),
    },
    "continuum-check": {
        "deltas": (_parse_float_list, "0.2,0.1,0.05,0.025"),
        "diffusion": (float, "0.5"),
        "t": (float, "2.56"),
        "p_window": (float, "2.0"),
        "x_window": (float, "5.0"),
        "diffusion_deltas": (_parse_float_list, "0.05,0.025,0.0125"),
        "diffusion_t": (float, "1.0"),
        "order_threshold": (float, "1.8"),
        "l1_threshold": (float, "0.02"),
        "pad": (int, "64"),
    },
    "spectral-check": {
        "delta": (float, "0.1"),
        "site_count": (int, "1024"),
        "alpha": (_parse_alpha, "sqrt2"),
        "expansion_p": (float, "1.0"),
        "expansion_deltas": (_parse_float_list, "0.2,0.1,0.05"),
        "unitarity_tol": (float, "1e-14"),
    },
}


def _read_config_file(path: str) -> dict[str, str]:
    """Plain key = value lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve_config(scenario: str, file_entries: dict[str, str], set_entries: list[str]) -> dict:
    """Merge defaults, config-file entries, and --set overrides (that order)."""
    schema = SCHEMAS[scenario]
    raw = {key: default for key, (_, default) in schema.items()}
    for key, value in file_entries.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for scenario {scenario}")
        raw[key] = value
    for entry in set_entries:
        if "=" not in entry:
            raise ConfigError(f"--set expects KEY=VALUE, got {entry!r}")
        key, value = entry.split("=", 1)
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for scenario {scenario}")
        raw[key] = value.strip()
    cfg = {}
    for key, (parser, _) in schema.items():
        try:
            cfg[key] = parser(raw[key])
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value for {key!r}: {raw[key]!r} ({exc})") from exc
    return cfg


def _grid(x_min: float, x_max: float, step: float) -> np.ndarray:
    if not (step > 0):
        raise ConfigError(f"grid step must be positive, got {step}")
    if not (x_max > x_min):
        raise ConfigError(f"grid needs x_max > x_min, got [{x_min}, {x_max}]")
    n = int(round((x_max - x_min) / step))
    if n < 1:
        raise ConfigError("grid needs at least two points")
    return x_min + step * np.arange(n + 1)


# ---------------------------------------------------------------------------
# level studies (shared between the CLI and the acceptance tests)


def validate_level_sequence(deltas, D: float, t: float) -> list[int]:
    """Check a halving delta sequence against the mod-8 stroboscopic rule.

    Returns the per-level step counts s = t/epsilon with epsilon fixed by
    delta^2 = 2 D epsilon.  Raises ConfigError on non-halving sequences,
    non-integer step counts, or step counts not divisible by 8.
    """
    deltas = list(deltas)
    if len(deltas) < 2:
        raise ConfigError("need at least two levels")
    for d in deltas:
        if not (d > 0):
            raise ConfigError(f"deltas must be positive, got {d}")
    for a, b in zip(deltas, deltas[1:]):
        if abs(b / a - 0.5) > 1e-9:
            raise ConfigError(f"levels must halve: {a} -> {b}")
    steps = []
    for d in deltas:
        eps = d * d / (2.0 * D)
        s_float = t / eps
        s = int(round(s_float))
        if abs(s_float - s) > 1e-6 or s <= 0:
            raise ConfigError(f"t/epsilon = {s_float} is not a positive integer at delta={d}")
        if s % 8 != 0:
            raise ConfigError(f"level delta={d} gives s={s}, violating the mod-8 rule")
        steps.append(s)
    return steps


def _level_params(delta: float, D: float, s: int, pad: int, alpha: float) -> LatticeParams:
    n = 2 * s + pad
    if n % 2:
        n += 1
    return LatticeParams(delta=delta, epsilon=delta * delta / (2.0 * D), site_count=n, alpha=alpha)


def schrodinger_level(delta: float, D: float, t: float, p_window: float, x_window: float, pad: int = 64) -> dict:
    """One level of the norm-preserving continuum study.

    Evolves the phi point source s steps with the position-space map,
    assembles psi+, and measures: the rotation-angle error (exact
    eigenvalue phase to the s-th power against the continuum rotation
    phase, rms over the momentum grid inside the window), the full-matrix
    error (T^s against the rotation matrix, same window, reported), the
    kernel errors (sampled psi+ density against the Fresnel kernel: raw,
    even part, odd fraction), and the p = 0 identity residual.

    The raw kernel error carries an O(delta) odd-in-x component from the
    eigenvector (branch) admixture of the transfer matrix, which is odd in
    p; the even part isolates the kernel comparison the continuum limit
    actually controls at second order.  Both are returned.
    """
    s = validate_level_sequence([delta, delta / 2], D, t)[0]
    params = _level_params(delta, D, s, pad, SQRT2)
    n = params.site_count
    m0 = n // 2

    # rotation-angle (eigenphase) error over the in-window momentum grid
    p = momentum_grid(params)
    sel = np.abs(p) <= p_window
    pw = p[sel]
    u = pw * delta
    lam = 0.5 * SQRT2 * (np.cos(u) + 1j * np.sqrt(1.0 + np.sin(u) ** 2))
    rot_err = float(np.sqrt(np.mean(np.abs(lam**s - np.exp(1j * pw * pw * D * t)) ** 2)))

    # full-matrix error against the rotation, reported alongside
    frob = []
    for pv in pw:
        ts = stroboscopic_power(transfer_matrix(float(pv), delta, SQRT2), s)
        frob.append(np.linalg.norm(ts - continuum_propagator(float(pv), D, t)))
    matrix_err = float(np.sqrt(np.mean(np.square(frob))))

    # position-space evolution of the phi point source
    field = point_source_phi(params, m0)
    phi = field.phi
    for _ in range(s):
        phi = phi_step(phi, params)
    psi_plus, _ = assemble_psi(phi[0], phi[1])

    # sample the populated sublattice and convert to a density
    kmax = int(math.floor(x_window / (2.0 * delta)))
    kk = np.arange(-kmax, kmax + 1)
    x = 2.0 * kk * delta
    est = psi_plus[m0 + 2 * kk] * PSI_DENSITY_CALIBRATION / (2.0 * delta)
    ker = fresnel_kernel(x, t, D)
    ker_norm = float(np.linalg.norm(ker))
    raw = float(np.linalg.norm(est - ker)) / ker_norm
    est_even = 0.5 * (est + est[::-1])
    est_odd = 0.5 * (est - est[::-1])
    even = float(np.linalg.norm(est_even - ker)) / ker_norm
    odd_fraction = float(np.linalg.norm(est_odd)) / ker_norm

    p0 = stroboscopic_power(transfer_matrix(0.0, delta, SQRT2), 8)
    p0_residual = float(np.max(np.abs(p0 - np.eye(2))))

    return {
        "delta": delta,
        "s": s,
        "rotation_angle_error": rot_err,
        "matrix_error": matrix_err,
        "kernel_raw_rel": raw,
        "kernel_even_rel": even,
        "odd_fraction": odd_fraction,
        "p0_residual": p0_residual,
    }


def schrodinger_levels(deltas, D: float, t: float, p_window: float, x_window: float, pad: int = 64) -> dict:
    """Halving-delta convergence study of the norm-preserving branch."""
    validate_level_sequence(deltas, D, t)
    levels = [schrodinger_level(d, D, t, p_window, x_window, pad) for d in deltas]
    ds = [lv["delta"] for lv in levels]
    return {
        "levels": levels,
        "rotation_order": fit_convergence_order(ds, [lv["rotation_angle_error"] for lv in levels]),
        "matrix_order": fit_convergence_order(ds, [lv["matrix_error"] for lv in levels]),
        "kernel_raw_order": fit_convergence_order(ds, [lv["kernel_raw_rel"] for lv in levels]),
        "kernel_even_order": fit_convergence_order(ds, [lv["kernel_even_rel"] for lv in levels]),
    }


def diffusion_levels(deltas, D: float, t: float, pad: int = 64) -> dict:
    """Bare-walk (alpha = 1) z-field against the heat kernel, per level.

    The point source's direction-summed density on the populated
    sublattice is compared in L1, relative to the kernel's unit mass.
    """
    steps = validate_level_sequence(deltas, D, t)
    errors = []
    for delta, s in zip(deltas, steps):
        params = _level_params(delta, D, s, pad, 1.0)
        m0 = params.site_count // 2
        z = point_source_z(params, m0).z
        for _ in range(s):
            z = z_step(z, params)
        kmax = s // 2
        kk = np.arange(-kmax, kmax + 1)
        x = 2.0 * kk * delta
        dens = (z[0] + z[1])[m0 + 2 * kk] / (2.0 * delta)
        g = diffusion_green(x, t, D)
        errors.append(float(np.sum(np.abs(dens - g)) * 2.0 * delta))
    return {"deltas": list(deltas), "steps": steps, "l1_rel": errors}


# ---------------------------------------------------------------------------
# scenario runners


@dataclass
class ScenarioResult:
    tables: dict[str, tuple[list[str], list[tuple]]]
    metrics: dict
    checks: dict[str, bool]


def _samples_rows(samples: list[PatternSample], t: float) -> list[tuple]:
    return [(s.x, t, s.value, s.in_cone) for s in samples]


def _pattern_crossing_check(t: float, units: UnitsConfig, xs: np.ndarray, samples: list[PatternSample]) -> tuple[bool, dict]:
    """Two-way bracketing of analytic against sampled parity crossings.

    Analytic crossings sit where the straight-line proper time hits a
    half-period boundary: x = sqrt(t^2 - (k T/2)^2).  Every analytic
    crossing inside the sampled window must have a sampled sign change
    within one grid cell and vice versa.
    """
    h = float(xs[1] - xs[0])
    half = units.half_period
    predicted = []
    k = 1
    while k * half <= t:
        xk = math.sqrt(max(t * t - (k * half) ** 2, 0.0))
        if xk < t:
            predicted.extend([xk] if xk == 0.0 else [xk, -xk])
        k += 1
    lo, hi = float(xs[0]) + h, float(xs[-1]) - h
    predicted = sorted(x for x in predicted if lo <= x <= hi)

    vals = [s.value for s in samples]
    mids = [
        0.5 * (samples[i].x + samples[i + 1].x)
        for i in range(len(samples) - 1)
        if samples[i].in_cone and samples[i + 1].in_cone and vals[i] * vals[i + 1] < 0
    ]
    ok_pred = all(any(abs(xm - xp) <= h for xm in mids) for xp in predicted)
    ok_samp = all(any(abs(xm - xp) <= h for xp in predicted) for xm in mids)
    info = {
        "n_predicted_crossings": len(predicted),
        "n_sampled_crossings": len(mids),
        "predicted_crossings": predicted,
        "sampled_crossings": mids,
    }
    return ok_pred and ok_samp, info


def run_clock_pattern(cfg: dict, seed: int) -> ScenarioResult:
    units = UnitsConfig(cfg["compton_period"])
    if not (cfg["t"] > 0):
        raise ConfigError(f"t must be positive, got {cfg['t']}")
    xs = _grid(cfg["x_min"], cfg["x_max"], cfg["x_step"])
    ts = _grid(cfg["raster_t_min"], cfg["raster_t_max"], cfg["raster_t_step"])
    if cfg["raster_t_min"] <= 0:
        raise ConfigError("raster_t_min must be positive")

    slice_samples = plane_pattern(cfg["t"], xs, units)
    slice_rows = _samples_rows(slice_samples, cfg["t"])
    raster_rows = []
    cone_ok = True
    for tv in ts:
        row_samples = plane_pattern(float(tv), xs, units)
        raster_rows.extend(_samples_rows(row_samples, float(tv)))
        cone_ok = cone_ok and all(s.value == 0 for s in row_samples if not s.in_cone)
    cone_ok = cone_ok and all(s.value == 0 for s in slice_samples if not s.in_cone)

    bracketed, info = _pattern_crossing_check(cfg["t"], units, xs, slice_samples)
    header = ["x", "t", "parity", "in_cone"]
    return ScenarioResult(
        tables={"slice": (header, slice_rows), "raster": (header, raster_rows)},
        metrics={"t": cfg["t"], **info},
        checks={"out_of_cone_zero": cone_ok, "crossings_bracketed": bracketed},
    )


def run_propagator_compare(cfg: dict, seed: int) -> ScenarioResult:
    units = UnitsConfig(cfg["compton_period"])
    if not (cfg["t"] > 0):
        raise ConfigError(f"t must be positive, got {cfg['t']}")
    if not (0.0 <= cfg["min_sign_agreement"] <= 1.0):
        raise ConfigError("min_sign_agreement must lie in [0, 1]")
    if not (cfg["max_spacing_rel"] > 0):
        raise ConfigError("max_spacing_rel must be positive")
    w = cfg["x_window"]
    xs = _grid(-w, w, cfg["x_step"])

    samples = plane_pattern(cfg["t"], xs, units)
    pattern = np.array([s.value for s in samples], dtype=float)
    re_k = np.real(feynman_free(xs, cfg["t"], units))
    rep = compare(
        SampledSignal(xs, pattern, label="clock_pattern"),
        SampledSignal(xs, re_k, label="re_feynman"),
        mode=cfg["alignment"],
    )

    spacing_ok = rep.insufficient_crossings or rep.crossing_spacing_error <= cfg["max_spacing_rel"]
    rows = list(zip(xs.tolist(), pattern.tolist(), re_k.tolist(), np.sign(re_k).tolist()))
    return ScenarioResult(
        tables={"compare": (["x", "clock_parity", "re_feynman", "sign_re_feynman"], rows)},
        metrics={
            "t": cfg["t"],
            "x_window": w,
            "l1": rep.l1,
            "l2": rep.l2,
            "linf": rep.linf,
            "sign_agreement_fraction": rep.sign_agreement_fraction,
            "crossing_spacing_error": rep.crossing_spacing_error,
            "n_spacing_pairs": rep.n_spacing_pairs,
            "insufficient_crossings": rep.insufficient_crossings,
            "n_crossings_pattern": int(rep.zero_crossings_a.size),
            "n_crossings_re_feynman": int(rep.zero_crossings_b.size),
        },
        checks={
            "sign_agreement": rep.sign_agreement_fraction >= cfg["min_sign_agreement"],
            "crossing_spacing": bool(spacing_ok),
        },
    )


def run_double_slit(cfg: dict, seed: int) -> ScenarioResult:
    units = UnitsConfig(cfg["compton_period"])
    xs = _grid(cfg["x_min"], cfg["x_max"], cfg["x_step"])
    geom = SlitGeometry(
        half_separation=cfg["half_separation"],
        source_to_slit_time=cfg["source_to_slit_time"],
        slit_to_screen_time=cfg["slit_to_screen_time"],
        screen_grid=tuple(float(x) for x in xs),
    )
    phis = double_slit_phi(geom, units)
    intens = double_slit_intensity(geom, units)
    # Classical control: average the squared signals instead of squaring
    # the averaged signal; each squared parity is 1, so the control is 1
    # on the doubly-reachable mask and produces no gaps.
    control = [1 if s.in_cone else 0 for s in phis]
    _, fey = two_source_superposition(xs, cfg["slit_to_screen_time"], cfg["half_separation"], units)

    binary_ok = all(
        i.value in (0, 1) and i.value == p.value * p.value
        for p, i in zip(phis, intens)
    )
    control_ok = all(c == 1 for c, s in zip(control, phis) if s.in_cone)

    gaps = []
    start = None
    for s in phis:
        in_gap = s.in_cone and s.value == 0
        if in_gap and start is None:
            start = s.x
        if not in_gap and start is not None:
            gaps.append((start, prev_x))
            start = None
        prev_x = s.x
    if start is not None:
        gaps.append((start, prev_x))

    nodes = local_minima(xs, fey)
    expected_spacing = math.pi * cfg["slit_to_screen_time"] / (units.mass * cfg["half_separation"])
    if nodes.size >= 2:
        spacings = np.diff(nodes)
        node_dev = float(np.max(np.abs(spacings - expected_spacing)) / expected_spacing)
    else:
        node_dev = math.inf
    node_ok = node_dev <= cfg["node_tolerance"]

    rows = [
        (s.x, s.value, i.value, c, float(f), s.in_cone)
        for s, i, c, f in zip(phis, intens, control, fey)
    ]
    return ScenarioResult(
        tables={
            "slit": (
                ["x", "phi", "phi_sq", "classical_control", "feynman_intensity", "in_cone"],
                rows,
            )
        },
        metrics={
            "gap_intervals": [[a, b] for a, b in gaps],
            "n_gaps": len(gaps),
            "node_positions": nodes.tolist(),
            "expected_node_spacing": expected_spacing,
            "node_spacing_max_rel_dev": node_dev,
        },
        checks={
            "phi_squared_binary": binary_ok,
            "classical_control_gap_free": control_ok,
            "node_spacing": node_ok,
        },
    )


def run_lattice_evolve(cfg: dict, seed: int) -> ScenarioResult:
    delta, D = cfg["delta"], cfg["diffusion"]
    if not (delta > 0 and D > 0):
        raise ConfigError("delta and diffusion must be positive")
    n_steps = cfg["n_steps"]
    every = cfg["snapshot_every"]
    if n_steps < 1 or every < 1:
        raise ConfigError("n_steps and snapshot_every must be >= 1")
    if cfg["stroboscopic"] and (n_steps % 8 != 0 or every % 8 != 0):
        raise ConfigError(
            f"stroboscopic run requires n_steps and snapshot_every % 8 == 0, got {n_steps}, {every}"
        )
    n = cfg["site_count"] if cfg["site_count"] > 0 else 2 * n_steps + 64
    if n <= 2 * n_steps:
        raise ConfigError(f"site_count {n} cannot hold {n_steps} steps without wraparound")
    params = LatticeParams(delta=delta, epsilon=delta * delta / (2.0 * D), site_count=n, alpha=cfg["alpha"])
    site = cfg["initial_site"] if cfg["initial_site"] >= 0 else n // 2
    if site >= n:
        raise ConfigError(f"initial_site {site} outside the {n}-site chain")
    if cfg["mc_paths"] > 0 and cfg["init"] != "unit_state":
        raise ConfigError("the Monte Carlo overlay requires init=unit_state")

    if cfg["init"] == "unit_state":
        if cfg["initial_state"] not in (1, 2, 3, 4):
            raise ConfigError(f"initial_state must be 1..4, got {cfg['initial_state']}")
        state: object = unit_state_field(params, cfg["initial_state"], site)
    elif cfg["init"] == "phi_point":
        state = point_source_phi(params, site)
    else:
        state = point_source_z(params, site)

    snap_steps = sorted(set(range(0, n_steps + 1, every)) | {n_steps})
    p_rows: list[tuple] = []
    z_rows: list[tuple] = []
    masses = []
    variances = []

    current = state
    done = 0
    for s_target in snap_steps:
        current = evolve(current, params, s_target - done, stroboscopic=cfg["stroboscopic"])
        done = s_target
        if isinstance(current, DecomposedField):
            dec, four = current, compose(current)
        else:
            four, dec = current, decompose(current)
        xs = np.arange(n) * delta
        for m in range(n):
            p_rows.append((s_target, m, xs[m], four.p[0, m], four.p[1, m], four.p[2, m], four.p[3, m]))
            z_rows.append((s_target, m, xs[m], dec.z[0, m], dec.z[1, m], dec.phi[0, m], dec.phi[1, m]))
        masses.append(four.total_mass())
        u = dec.z[0] + dec.z[1]
        if u.sum() > 0:
            variances.append((s_target * params.epsilon, field_variance(u, params)))

    drift = abs(masses[-1] - masses[0])
    conservation_tol = 1e-12 * max(1.0, n_steps / 1e4) * max(abs(masses[0]), 1.0)
    checks = {}
    metrics: dict = {
        "n_steps": n_steps,
        "site_count": n,
        "alpha": params.alpha,
        "epsilon": params.epsilon,
        "mass_initial": masses[0],
        "mass_final": masses[-1],
        "mass_drift": drift,
    }
    # Mass conservation is a property of the probabilistic walk; with
    # alpha != 1 the phi block is deliberately rescaled each step, so the
    # four-state mass is only conserved for alpha = 1.
    if params.alpha == 1.0:
        checks["conservation"] = drift <= conservation_tol

    # The diffusive rate is the slope of var(t) for t > 0; a unit-state
    # start carries a one-cell offset from its ballistic first step, so
    # the t = 0 snapshot is excluded from the fit.
    if params.alpha == 1.0 and cfg["init"] in ("unit_state", "z_point") and len(variances) >= 3:
        tv = np.array([v[0] for v in variances[1:]])
        var = np.array([v[1] for v in variances[1:]])
        slope = float(np.polyfit(tv, var, 1)[0])
        rel = abs(slope - 2.0 * D) / (2.0 * D)
        metrics["variance_slope"] = slope
        metrics["variance_slope_rel_dev"] = rel
        checks["variance_slope"] = rel <= 0.02

    tables = {
        "snapshots_p": (["step", "m", "x", "p1", "p2", "p3", "p4"], p_rows),
        "snapshots_zphi": (["step", "m", "x", "z1", "z2", "phi1", "phi2"], z_rows),
    }

    if cfg["mc_paths"] > 0:
        est = monte_carlo_estimate(params, n_steps, cfg["mc_paths"], seed, cfg["initial_state"], site)
        det = decompose(current) if not isinstance(current, DecomposedField) else current
        scale = params.alpha**n_steps
        det_phi = det.phi * scale
        z_true_se, phi_true_se = deposit_standard_errors(det, params, n_steps, est.n_paths)
        z_floor = 0.5 / est.n_paths
        # Floor the estimated SE with the exact one from the deterministic
        # field: the estimated SE collapses at low-count tail sites.
        z_band = 4.0 * np.maximum.reduce([est.z_stderr, z_true_se, np.full_like(z_true_se, z_floor)])
        phi_band = 4.0 * np.maximum.reduce(
            [est.phi_stderr, phi_true_se, np.full_like(phi_true_se, est.deposit_quantum)]
        )
        z_dev = np.abs(est.z_hat - det.z) / z_band
        phi_dev = np.abs(est.phi_hat - det_phi) / phi_band
        checks["mc_within_4se"] = bool(z_dev.max() <= 1.0 and phi_dev.max() <= 1.0)
        metrics["mc_paths"] = est.n_paths
        metrics["mc_max_z_dev_4se"] = float(z_dev.max())
        metrics["mc_max_phi_dev_4se"] = float(phi_dev.max())
        xs = np.arange(n) * delta
        mc_rows = [
            (
                m,
                xs[m],
                est.z_hat[0, m],
                est.z_hat[1, m],
                est.phi_hat[0, m],
                est.phi_hat[1, m],
                est.z_stderr[0, m],
                est.z_stderr[1, m],
                est.phi_stderr[0, m],
                est.phi_stderr[1, m],
            )
            for m in range(n)
        ]
        tables["mc_overlay"] = (
            [
                "m",
                "x",
                "z1_hat",
                "z2_hat",
                "phi1_hat",
                "phi2_hat",
                "z1_stderr",
                "z2_stderr",
                "phi1_stderr",
                "phi2_stderr",
            ],
            mc_rows,
        )

    return ScenarioResult(tables=tables, metrics=metrics, checks=checks)


def run_continuum_check(cfg: dict, seed: int) -> ScenarioResult:
    D, t = cfg["diffusion"], cfg["t"]
    if not (D > 0 and t > 0 and cfg["diffusion_t"] > 0):
        raise ConfigError("diffusion, t, and diffusion_t must be positive")
    if len(cfg["deltas"]) < 3 or len(cfg["diffusion_deltas"]) < 3:
        raise ConfigError("order fits need at least three levels")
    validate_level_sequence(cfg["deltas"], D, t)
    validate_level_sequence(cfg["diffusion_deltas"], D, cfg["diffusion_t"])
    if cfg["pad"] < 2:
        raise ConfigError("pad must be >= 2")

    study = schrodinger_levels(cfg["deltas"], D, t, cfg["p_window"], cfg["x_window"], cfg["pad"])
    diff = diffusion_levels(cfg["diffusion_deltas"], D, cfg["diffusion_t"], cfg["pad"])

    levels = study["levels"]
    raw = [lv["kernel_raw_rel"] for lv in levels]
    level_rows = [
        (
            lv["delta"],
            lv["s"],
            lv["rotation_angle_error"],
            lv["matrix_error"],
            lv["kernel_raw_rel"],
            lv["kernel_even_rel"],
            lv["odd_fraction"],
            lv["p0_residual"],
        )
        for lv in levels
    ]
    diff_rows = list(zip(diff["deltas"], diff["steps"], diff["l1_rel"]))

    thr = cfg["order_threshold"]
    checks = {
        "rotation_order": study["rotation_order"] >= thr,
        "kernel_order": study["kernel_even_order"] >= thr,
        "kernel_raw_monotone": all(a > b for a, b in zip(raw, raw[1:])),
        "diffusion_l1": diff["l1_rel"][0] <= cfg["l1_threshold"],
        "diffusion_monotone": all(a > b for a, b in zip(diff["l1_rel"], diff["l1_rel"][1:])),
        "p0_identity": all(lv["p0_residual"] <= 1e-14 for lv in levels),
    }
    metrics = {
        "rotation_order": study["rotation_order"],
        "matrix_order": study["matrix_order"],
        "kernel_even_order": study["kernel_even_order"],
        "kernel_raw_order": study["kernel_raw_order"],
        "diffusion_l1_rel": diff["l1_rel"],
        "order_threshold": thr,
        "l1_threshold": cfg["l1_threshold"],
    }
    return ScenarioResult(
        tables={
            "levels": (
                [
                    "delta",
                    "s",
                    "rotation_angle_error",
                    "matrix_error",
                    "kernel_raw_rel",
                    "kernel_even_rel",
                    "odd_fraction",
                    "p0_residual",
                ],
                level_rows,
            ),
            "diffusion": (["delta", "s", "l1_rel"], diff_rows),
        },
        metrics=metrics,
        checks=checks,
    )


def run_spectral_check(cfg: dict, seed: int) -> ScenarioResult:
    delta, alpha = cfg["delta"], cfg["alpha"]
    if not (delta > 0):
        raise ConfigError("delta must be positive")
    n = cfg["site_count"]
    if n < 2 or n % 2:
        raise ConfigError(f"site_count must be even and >= 2, got {n}")
    params = LatticeParams(delta=delta, epsilon=delta * delta, site_count=n, alpha=alpha)
    ps = momentum_grid(params)

    rows = []
    unit_max = 0.0
    lam_dev = 0.0
    det_dev = 0.0
    target_mod = alpha / SQRT2
    target_det = 0.5 * alpha * alpha
    eye = np.eye(2)
    for pv in ps:
        tm = transfer_matrix(float(pv), delta, alpha)
        resid = float(np.max(np.abs(tm.matrix.conj().T @ tm.matrix - target_det * eye)))
        lam_p, lam_m = eigenvalues(tm)
        det = complex(np.linalg.det(tm.matrix))
        unit_max = max(unit_max, resid)
        lam_dev = max(lam_dev, abs(abs(lam_p) - target_mod), abs(abs(lam_m) - target_mod))
        det_dev = max(det_dev, abs(det - target_det))
        rows.append((float(pv), resid, abs(lam_p), abs(lam_m), det.real, det.imag))

    exp_deltas = cfg["expansion_deltas"]
    if len(exp_deltas) < 2:
        raise ConfigError("expansion fit needs at least two deltas")
    exp_errors = []
    for d in exp_deltas:
        tm = transfer_matrix(cfg["expansion_p"], d, alpha)
        lam_p, _ = eigenvalues(tm)
        exp_errors.append(abs(lam_p - eigenvalue_leading_order(cfg["expansion_p"], d, alpha)))
    exp_order = fit_convergence_order(exp_deltas, exp_errors)

    checks = {
        "eigen_modulus_constant": lam_dev <= 1e-14,
        "determinant_constant": det_dev <= 1e-14,
        "expansion_order": exp_order >= 3.8,
    }
    # T dagger T = alpha^2/2 I; only alpha = sqrt(2) makes it the identity,
    # so the unitarity gate applies to that branch alone.
    if abs(alpha - SQRT2) < 1e-15:
        checks["unitarity"] = unit_max <= cfg["unitarity_tol"]
    return ScenarioResult(
        tables={
            "spectrum": (
                ["p", "unitarity_residual", "abs_lambda_plus", "abs_lambda_minus", "re_det", "im_det"],
                rows,
            ),
            "expansion": (["delta", "residual"], list(zip(exp_deltas, exp_errors))),
        },
        metrics={
            "unitarity_max_residual": unit_max,
            "eigen_modulus_max_dev": lam_dev,
            "determinant_max_dev": det_dev,
            "expansion_order": exp_order,
        },
        checks=checks,
    )


RUNNERS = {
    "clock-pattern": run_clock_pattern,
    "propagator-compare": run_propagator_compare,
    "double-slit": run_double_slit,
    "lattice-evolve": run_lattice_evolve,
    "continuum-check": run_continuum_check,
    "spectral-check": run_spectral_check,
}


# ---------------------------------------------------------------------------
# output


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _table_bytes(header: list[str], rows: list[tuple], fmt: str) -> bytes:
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
        return ("\n".join(lines) + "\n").encode("utf-8")
    payload = {
        "header": header,
        "rows": [[_json_safe(v) for v in row] for row in rows],
    }
    return (json.dumps(payload, sort_keys=True, indent=None, separators=(",", ":")) + "\n").encode("utf-8")


def _json_safe(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.ndarray):
        return [_json_safe(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if v is None or isinstance(v, str):
        return v
    return str(v)


def run_scenario(scenario: str, cfg: dict, out_dir: str, fmt: str, seed: int, threads: int):
    """Compute a scenario and write its artifacts; returns (exit_code, report).

    Validation happens before any filesystem work; data files are a pure
    function of (config, seed) regardless of thread count, while the
    report carries the wall-clock duration and therefore is not expected
    to be byte-stable.
    """
    start = time.perf_counter()
    result = RUNNERS[scenario](cfg, seed)

    out = Path(out_dir)
    ext = "csv" if fmt == "csv" else "json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        digests = {}
        for name in sorted(result.tables):
            header, rows = result.tables[name]
            blob = _table_bytes(header, rows, fmt)
            path = out / f"{name}.{ext}"
            path.write_bytes(blob)
            digests[path.name] = hashlib.sha256(blob).hexdigest()
        manifest_digest = hashlib.sha256(
            "\n".join(f"{k}:{v}" for k, v in sorted(digests.items())).encode("utf-8")
        ).hexdigest()
        manifest = {
            "tool_version": __version__,
            "scenario": scenario,
            "config": _json_safe(cfg),
            "seed": seed,
            "threads": threads,
            "format": fmt,
            "duration_seconds": time.perf_counter() - start,
            "checks": result.checks,
            "files": digests,
            "digest": manifest_digest,
        }
        report = {**_json_safe(result.metrics), "checks": result.checks, "manifest": manifest}
        (out / "report.json").write_text(
            json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO, None

    if not all(result.checks.values()):
        failed = [k for k, ok in result.checks.items() if not ok]
        print(f"numerical checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK, report
    return EXIT_OK, report


def verify_manifest(out_dir: str) -> bool:
    """Re-hash the emitted data files against the manifest in report.json."""
    out = Path(out_dir)
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    files = report["manifest"]["files"]
    for name, digest in files.items():
        blob = (out / name).read_bytes()
        if hashlib.sha256(blob).hexdigest() != digest:
            return False
    recomputed = hashlib.sha256(
        "\n".join(f"{k}:{v}" for k, v in sorted(files.items())).encode("utf-8")
    ).hexdigest()
    return recomputed == report["manifest"]["digest"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clockwalk",
        description="Clock-particle lattice experiments: pattern, filter, walk, and continuum checks.",
    )
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--out", default=None, help="output directory (default runs/<scenario>)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1, help="recorded in the manifest; results never depend on it")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {args.threads}")
        if args.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {args.seed}")
        file_entries = _read_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.scenario, file_entries, args.set)
        out_dir = args.out if args.out else str(Path("runs") / args.scenario)
        code, _ = run_scenario(args.scenario, cfg, out_dir, args.format, args.seed, args.threads)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
