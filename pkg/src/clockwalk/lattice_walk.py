"""Parity-tracking four-state lattice walk and its block decomposition.

Four densities p1..p4 live on a periodic chain: states 1,3 move right,
states 2,4 move left, and states advance cyclically 1->2->3->4->1 with
probability 1/2 per step.  States 1,2 carry parity +1 and states 3,4
parity -1.  The change of variables z = half-sums, phi = half-differences
splits the evolution into a diffusive block (z) and a signed, parity
block (phi) carrying an adjustable per-step normalization alpha.  A
signed-path Monte Carlo sampler provides an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SQRT2",
    "LatticeParams",
    "FourStateField",
    "DecomposedField",
    "McEstimate",
    "zeros_field",
    "unit_state_field",
    "point_source_phi",
    "point_source_z",
    "step_four_state",
    "decompose",
    "compose",
    "z_step",
    "phi_step",
    "evolve",
    "mirror_field",
    "monte_carlo_estimate",
    "field_variance",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LatticeParams:
    """Lattice geometry and per-step normalization.

    delta is the site spacing, epsilon the time step, so the diffusion
    constant D = delta^2 / (2 epsilon) is fixed by the grid.  alpha scales
    the phi block each step; alpha = 1 is the bare walk, alpha = sqrt(2)
    the norm-preserving choice.  The chain is periodic with site_count
    sites; callers must keep the walk's light cone from wrapping (the
    periodic chain is then indistinguishable from the infinite one).
    """

    delta: float
    epsilon: float
    site_count: int
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (isinstance(self.site_count, int) and self.site_count >= 2):
            raise ValueError(f"site_count must be an integer >= 2, got {self.site_count}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def diffusion_constant(self) -> float:
        return self.delta * self.delta / (2.0 * self.epsilon)


@dataclass
class FourStateField:
    """Site-resolved densities of the four walker states at one step.

    p has shape (4, N); row k holds state k+1.
    """

    p: np.ndarray
    step_index: int = 0

    def total_mass(self) -> float:
        return float(self.p.sum())


@dataclass
class DecomposedField:
    """The (z, phi) representation: z = half-sums, phi = half-differences.

    z and phi have shape (2, N).  Row 0 collects the right-moving states
    (1, 3), row 1 the left-moving states (2, 4); phi records parity
    partitioned by direction.
    """

    z: np.ndarray
    phi: np.ndarray
    step_index: int = 0


@dataclass
class McEstimate:
    """Monte Carlo field estimates with per-site standard errors.

    Estimates are empirical means of bounded per-path deposits (one
    deposit of magnitude 1/2 per walker), with the phi block scaled by
    alpha**n_steps afterwards; deposit_quantum is the smallest nonzero
    estimate magnitude, used as a standard-error floor wherever a site
    received no hits (the rule-of-three scale of a zero count).
    """

    z_hat: np.ndarray
    phi_hat: np.ndarray
    z_stderr: np.ndarray
    phi_stderr: np.ndarray
    n_paths: int
    n_steps: int
    seed: int
    deposit_quantum: float


def zeros_field(params: LatticeParams) -> FourStateField:
    return FourStateField(np.zeros((4, params.site_count)), 0)


def unit_state_field(params: LatticeParams, state: int, site: int) -> FourStateField:
    """Unit mass in a single state at a single site."""
    if state not in (1, 2, 3, 4):
        raise ValueError(f"state must be 1..4, got {state}")
    f = zeros_field(params)
    f.p[state - 1, site % params.site_count] = 1.0
    return f


def point_source_phi(params: LatticeParams, site: int) -> DecomposedField:
    """Point source in the phi sector: (phi1, phi2) = (0, sqrt(2)) at one site.

    The amplitude sqrt(2) makes both assembled spin components start at
    1/sqrt(2), the initial condition whose continuum limit is the
    free-particle kernel with unit total mass.
    """
    n = params.site_count
    z = np.zeros((2, n))
    phi = np.zeros((2, n))
    phi[1, site % n] = SQRT2
    return DecomposedField(z, phi, 0)


def point_source_z(params: LatticeParams, site: int) -> DecomposedField:
    """Point source in the z sector with unit direction-summed mass.

    (z1, z2) = (1/2, 1/2) at one site is an eigenvector of the one-step z
    map, so the diffusive comparison starts with no directional transient.
    """
    n = params.site_count
    z = np.zeros((2, n))
    phi = np.zeros((2, n))
    z[:, site % n] = 0.5
    return DecomposedField(z, phi, 0)


def step_four_state(f: FourStateField, params: LatticeParams) -> FourStateField:
    """One step of the four-state walk (periodic chain).

    Each state's density moves one site in its direction; half of it then
    advances to the next state in the cycle.  Total mass is conserved
    exactly up to rounding.
    """
    p1, p2, p3, p4 = f.p
    if p1.shape != (params.site_count,):
        raise ValueError(
            f"field has {p1.shape[0]} sites, params expect {params.site_count}"
        )
    r1 = np.roll(p1, 1)   # p1(m-1)
    r2 = np.roll(p2, -1)  # p2(m+1)
    r3 = np.roll(p3, 1)
    r4 = np.roll(p4, -1)
    new = np.empty_like(f.p)
    new[0] = 0.5 * r1 + 0.5 * r4
    new[1] = 0.5 * r2 + 0.5 * r1
    new[2] = 0.5 * r3 + 0.5 * r2
    new[3] = 0.5 * r4 + 0.5 * r3
    return FourStateField(new, f.step_index + 1)


def decompose(f: FourStateField) -> DecomposedField:
    """Change of variables p -> (z, phi), invertible via compose()."""
    p1, p2, p3, p4 = f.p
    z = np.stack([0.5 * (p1 + p3), 0.5 * (p2 + p4)])
    phi = np.stack([0.5 * (p1 - p3), 0.5 * (p2 - p4)])
    return DecomposedField(z, phi, f.step_index)


def compose(d: DecomposedField) -> FourStateField:
    """Inverse change of variables (z, phi) -> p."""
    z1, z2 = d.z
    f1, f2 = d.phi
    p = np.stack([z1 + f1, z2 + f2, z1 - f1, z2 - f2])
    return FourStateField(p, d.step_index)


def z_step(z: np.ndarray, params: LatticeParams) -> np.ndarray:
    """One step of the diffusive block: both rows become the same average.

    z1'(m) = z2'(m) = (z1(m-1) + z2(m+1)) / 2, so after one step the two
    rows coincide and their sum performs a simple symmetric walk.
    """
    avg = 0.5 * (np.roll(z[0], 1) + np.roll(z[1], -1))
    return np.stack([avg, avg.copy()])


def phi_step(phi: np.ndarray, params: LatticeParams) -> np.ndarray:
    """One step of the parity block with the per-step normalization alpha.

    phi1'(m) = (alpha/2) (phi1(m-1) - phi2(m+1))
    phi2'(m) = (alpha/2) (phi1(m-1) + phi2(m+1))
    """
    a = 0.5 * params.alpha
    f1 = np.roll(phi[0], 1)
    f2 = np.roll(phi[1], -1)
    return np.stack([a * (f1 - f2), a * (f1 + f2)])


def evolve(field, params: LatticeParams, n_steps: int, stroboscopic: bool = False):
    """Apply n_steps of the per-step map to a four-state or decomposed field.

    Stroboscopic mode insists on n_steps being a multiple of 8 (the state
    cycle's return scale) and rejects anything else rather than rounding.
    """
    if not (isinstance(n_steps, int) and n_steps >= 0):
        raise ValueError(f"n_steps must be a nonnegative integer, got {n_steps}")
    if stroboscopic and n_steps % 8 != 0:
        raise ValueError(f"stroboscopic evolution requires n_steps % 8 == 0, got {n_steps}")
    if isinstance(field, FourStateField):
        out = FourStateField(field.p.copy(), field.step_index)
        for _ in range(n_steps):
            out = step_four_state(out, params)
        return out
    if isinstance(field, DecomposedField):
        z = field.z.copy()
        phi = field.phi.copy()
        for _ in range(n_steps):
            z = z_step(z, params)
            phi = phi_step(phi, params)
        return DecomposedField(z, phi, field.step_index + n_steps)
    raise TypeError(f"cannot evolve {type(field).__name__}")


def mirror_field(f: FourStateField) -> FourStateField:
    """Spatial mirror of a four-state field: m -> -m with the state cycle shifted.

    The reflection that commutes with the walk is q_k(m) = p_{k+1}(-m)
    (cycle shift 1->2->3->4->1, indices mod 4), not the naive swap of the
    two right-movers with the two left-movers: reflecting a right-mover
    mid-cycle lands on the left-mover that FOLLOWS it in the cycle, which
    keeps the move-then-advance ordering intact.  Applying mirror_field
    four times is the identity.
    """
    n = f.p.shape[1]
    idx = (-np.arange(n)) % n
    new = np.stack([f.p[1][idx], f.p[2][idx], f.p[3][idx], f.p[0][idx]])
    return FourStateField(new, f.step_index)


# States 1..4 mapped to internal 0..3: direction +1 for even rows (states
# 1, 3), -1 for odd rows; parity +1 for rows 0, 1 (states 1, 2).
_DIRECTIONS = np.array([1, -1, 1, -1], dtype=np.int64)


def monte_carlo_estimate(
    params: LatticeParams,
    n_steps: int,
    n_paths: int,
    seed: int,
    initial_state: int,
    initial_site: int,
) -> McEstimate:
    """Independent sampling oracle for the deterministic evolution.

    Each of n_paths walkers starts at (initial_state, initial_site); per
    step it moves one site in its current direction, then advances the
    state cycle with probability 1/2.  At the end each walker deposits
    1/2 into the z bucket of its direction and (parity sign)/2 into the
    phi bucket of its direction, at its final site; bucket sums divided by
    n_paths estimate decompose() of the evolved unit-state field, and the
    phi block is scaled by alpha**n_steps afterwards (exact, since the phi
    map is linear in alpha).

    Reproducibility contract: uniforms come from a counter-based generator
    keyed by seed, with the draw for (step, path) at stream position
    step * n_paths + path; results are a pure function of (seed, n_paths,
    n_steps) and independent of how the work is scheduled.
    """
    if initial_state not in (1, 2, 3, 4):
        raise ValueError(f"initial_state must be 1..4, got {initial_state}")
    if not (isinstance(n_paths, int) and n_paths >= 1):
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    if not (isinstance(n_steps, int) and n_steps >= 0):
        raise ValueError(f"n_steps must be >= 0, got {n_steps}")

    n = params.site_count
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    pos = np.full(n_paths, initial_site % n, dtype=np.int64)
    state = np.full(n_paths, initial_state - 1, dtype=np.int64)
    for _ in range(n_steps):
        pos += _DIRECTIONS[state]
        state = (state + (gen.random(n_paths) < 0.5)) & 3
    pos %= n

    parity = np.where(state < 2, 1.0, -1.0)
    right = (state & 1) == 0

    z_hat = np.zeros((2, n))
    phi_hat = np.zeros((2, n))
    z_sqsum = np.zeros((2, n))
    for row, mask in ((0, right), (1, ~right)):
        counts = np.bincount(pos[mask], minlength=n).astype(float)
        signed = np.bincount(pos[mask], weights=parity[mask], minlength=n)
        z_hat[row] = 0.5 * counts / n_paths
        phi_hat[row] = 0.5 * signed / n_paths
        z_sqsum[row] = 0.25 * counts / n_paths

    # Per-site deposit variance: deposits are 0 or +/-1/2, so the second
    # moment is 0.25 * hit fraction for both blocks.
    z_var = np.maximum(z_sqsum - z_hat**2, 0.0)
    phi_var = np.maximum(z_sqsum - phi_hat**2, 0.0)
    z_stderr = np.sqrt(z_var / n_paths)
    phi_stderr = np.sqrt(phi_var / n_paths)

    scale = params.alpha**n_steps
    return McEstimate(
        z_hat=z_hat,
        phi_hat=phi_hat * scale,
        z_stderr=z_stderr,
        phi_stderr=phi_stderr * scale,
        n_paths=n_paths,
        n_steps=n_steps,
        seed=seed,
        deposit_quantum=0.5 * scale / n_paths,
    )


def deposit_standard_errors(
    reference: DecomposedField,
    params: LatticeParams,
    n_steps: int,
    n_paths: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-site standard errors of monte_carlo_estimate.

    Given the deterministic decomposition the sampler targets (the bare
    unit-state walk, so reference.phi must be unscaled), the per-path
    deposit at a site is 0 or +/-1/2 with hit probability 2 * z; its
    second moment is 0.25 * (2 * z) for both blocks, so the sampling
    variances are 0.5 * z - z**2 and 0.5 * z - phi**2.  Unlike the
    stderr fields of McEstimate these do not collapse when a low-count
    site fluctuates downward, which makes them the right denominator
    when checking the sampler against a known reference.  The phi block
    is scaled by alpha**n_steps to match the estimate.
    """
    hit_second_moment = 0.5 * reference.z
    z_se = np.sqrt(np.maximum(hit_second_moment - reference.z**2, 0.0) / n_paths)
    phi_var = np.maximum(hit_second_moment - reference.phi**2, 0.0)
    phi_se = np.sqrt(phi_var / n_paths) * params.alpha**n_steps
    return z_se, phi_se


def field_variance(weights: np.ndarray, params: LatticeParams) -> float:
    """Variance of the site distribution defined by nonnegative weights.

    Positions are site_index * delta; the caller is responsible for the
    no-wrap guard (moments are meaningless once the walk wraps the chain).
    """
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have positive total mass")
    x = np.arange(w.size) * params.delta
    mean = float((w * x).sum() / total)
    return float((w * (x - mean) ** 2).sum() / total)
