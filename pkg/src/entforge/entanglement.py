"""Bipartition enumeration, entanglement measures/bounds, and analytic predictions.

Pure-state entanglement across a bipartition is the von Neumann entropy of a
reduced density matrix; for mixed states the distillable entanglement is
bracketed by the hashing-type lower bound S(rho_A) - S(rho) and the
logarithmic negativity log2 of the trace norm of the partial transpose.
The analytic side collects the random-state entropy average, the
fidelity-based entropy bound, and the resulting noise-threshold estimates.
"""
from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    Bipartition,
    DensityMatrix,
    StateVector,
    ValidationError,
    hermitian_eigenvalues,
    partial_transpose,
    reduced_density_matrix,
    trace_norm,
    von_neumann_entropy,
)

LN2 = math.log(2.0)


class RegimeWarning(UserWarning):
    """A perturbative formula was evaluated outside its validity regime."""


@dataclass(frozen=True)
class EntanglementSample:
    """Entanglement value (bits) attached to one bipartition."""

    bipartition: Bipartition
    value: float


@dataclass(frozen=True)
class EntanglementStats:
    """Population statistics of entanglement over a bipartition set."""

    mean: float
    std_dev: float
    relative_std: float
    count: int


@dataclass(frozen=True)
class Histogram:
    """Probability density table: sum(density) * bin_width = 1."""

    edges: np.ndarray
    density: np.ndarray
    bin_width: float


@dataclass(frozen=True)
class MixedSpectrum:
    """Distillable-entanglement bounds over all balanced bipartitions."""

    lower: list[EntanglementSample]
    upper: list[EntanglementSample]
    lower_stats: EntanglementStats
    upper_stats: EntanglementStats


def enumerate_balanced_bipartitions(n_q: int) -> list[Bipartition]:
    """All size-n_q/2 subsets containing qubit 0; C(n_q, n_q/2)/2 entries."""
    if n_q < 2 or n_q % 2:
        raise ValidationError("balanced bipartitions require even n_q >= 2")
    parts = []
    for combo in itertools.combinations(range(1, n_q), n_q // 2 - 1):
        parts.append(Bipartition.from_qubits(n_q, (0,) + combo))
    return parts


def stats(samples) -> EntanglementStats:
    """Population mean / standard deviation over a complete bipartition set."""
    values = np.asarray(
        [s.value if isinstance(s, EntanglementSample) else float(s) for s in samples],
        dtype=np.float64,
    )
    if values.size == 0:
        raise ValidationError("cannot compute statistics of an empty sample list")
    mean = float(values.mean())
    std = float(values.std())
    rel = std / mean if mean > 0 else math.inf
    return EntanglementStats(mean, std, rel, int(values.size))


def histogram(samples, bin_width: float) -> Histogram:
    """Normalized probability density over fixed-width bins."""
    if bin_width <= 0:
        raise ValidationError("bin_width must be positive")
    values = np.asarray(
        [s.value if isinstance(s, EntanglementSample) else float(s) for s in samples],
        dtype=np.float64,
    )
    if values.size == 0:
        raise ValidationError("cannot histogram an empty sample list")
    lo, hi = float(values.min()), float(values.max())
    n_bins = max(1, math.ceil((hi - lo) / bin_width))
    if lo + n_bins * bin_width < hi:  # rounding left the max outside
        n_bins += 1
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(values, bins=n_bins, range=(lo, lo + n_bins * bin_width))
    density = counts / (values.size * bin_width)
    return Histogram(edges, density, bin_width)


def pure_spectrum(state: StateVector, workers: int | None = None) -> list[EntanglementSample]:
    """Reduced-state entropy for every balanced bipartition of a pure state."""
    parts = enumerate_balanced_bipartitions(state.n_qubits)

    def entropy_of(part: Bipartition) -> float:
        return von_neumann_entropy(reduced_density_matrix(state, part))

    values = _map_over(parts, entropy_of, workers)
    return [EntanglementSample(p, v) for p, v in zip(parts, values)]


def page_value(n_q: int) -> float:
    """Large-N average entanglement of a random pure state, n_q/2 - 1/(2 ln 2)."""
    if n_q < 2:
        raise ValidationError("n_q must be >= 2")
    return n_q / 2.0 - 1.0 / (2.0 * LN2)


def haar_random_state(n_q: int, seed: int) -> StateVector:
    """State drawn from the unitarily invariant measure (normalized complex
    Gaussian amplitudes)."""
    if n_q < 1:
        raise ValidationError("n_q must be >= 1")
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(2**n_q) + 1j * rng.standard_normal(2**n_q)
    return StateVector(n_q, amps / np.linalg.norm(amps))


def log_negativity(rho: DensityMatrix, part: Bipartition) -> float:
    """log2 of the trace norm of the partial transpose."""
    return math.log2(trace_norm(partial_transpose(rho, part)))


def pure_log_negativity(state: StateVector, part: Bipartition) -> float:
    """Log negativity of a pure state from its Schmidt coefficients.

    The trace norm of a pure-state partial transpose is (sum_i sqrt(l_i))^2,
    which avoids the full N x N eigendecomposition.
    """
    eigs = hermitian_eigenvalues(reduced_density_matrix(state, part).matrix)
    roots = np.sqrt(np.clip(eigs, 0.0, 1.0))
    return 2.0 * math.log2(float(np.sum(roots)))


def distillable_bounds(rho: DensityMatrix, part: Bipartition) -> tuple[float, float]:
    """(lower, upper) bounds on distillable entanglement across the bipartition.

    lower = max(S(rho_A) - S(rho), 0); upper = log negativity.
    """
    s_total = von_neumann_entropy(rho)
    s_a = von_neumann_entropy(reduced_density_matrix(rho, part))
    lower = max(s_a - s_total, 0.0)
    upper = log_negativity(rho, part)
    if lower > upper + 1e-9:
        raise ValidationError(f"bound ordering violated: {lower} > {upper}")
    return lower, upper


def mixed_spectrum(rho: DensityMatrix, workers: int | None = None) -> MixedSpectrum:
    """Distillable-entanglement bounds over every balanced bipartition.

    The N x N eigendecompositions per bipartition dominate the cost for
    n_q >= 10, so bipartitions are distributed over a thread pool; output
    ordering is by bipartition mask regardless of scheduling.
    """
    parts = enumerate_balanced_bipartitions(rho.n_qubits)
    s_total = von_neumann_entropy(rho)

    def bounds_of(part: Bipartition) -> tuple[float, float]:
        s_a = von_neumann_entropy(reduced_density_matrix(rho, part))
        return max(s_a - s_total, 0.0), log_negativity(rho, part)

    pairs = _map_over(parts, bounds_of, workers)
    lower = [EntanglementSample(p, lo) for p, (lo, _) in zip(parts, pairs)]
    upper = [EntanglementSample(p, up) for p, (_, up) in zip(parts, pairs)]
    return MixedSpectrum(lower, upper, stats(lower), stats(upper))


def _map_over(items, fn, workers: int | None):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- analytic predictions -----------------------------------------------------


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy h(x) in bits."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def fano_entropy_bound(fidelity: float, n_q: int) -> float:
    """Entropy cap h(F) + (1-F) log2(N^2 - 1) implied by fidelity F."""
    if not -1e-10 <= fidelity <= 1.0 + 1e-10:
        raise ValidationError(f"fidelity {fidelity} outside [0, 1]")
    f = min(max(fidelity, 0.0), 1.0)
    return binary_entropy(f) + (1.0 - f) * math.log2(4.0**n_q - 1.0)


def predicted_entropy(
    epsilon: float, n_q: int, t: int, gamma: float, n_g: int
) -> float:
    """Perturbative entropy estimate x * (-log2 x + 2 n_q + 1/ln 2) with
    x = gamma * epsilon^2 * n_g * t.

    Valid for x << 1; x >= 1 is flagged with a RegimeWarning but still
    evaluated so sweeps can tabulate it uniformly.
    """
    x = gamma * epsilon**2 * n_g * t
    if x < 0.0:
        raise ValidationError("gamma * epsilon^2 * n_g * t must be >= 0")
    if x == 0.0:
        return 0.0
    if x >= 1.0:
        warnings.warn(
            f"perturbative argument {x:.3g} >= 1; estimate unreliable", RegimeWarning
        )
    return x * (-math.log2(x) + 2.0 * n_q + 1.0 / LN2)


def predicted_lower_bound(epsilon: float, n_q: int, t: int, gamma: float) -> float:
    """Distillable-entanglement floor n_q/2 - 1/(2 ln 2) - 6 gamma n_q^3 eps^2 t.

    May go negative for strong noise; callers clamp at zero for display,
    mirroring the max{., 0} in the exact bound.
    """
    if epsilon < 0 or gamma < 0 or t < 0:
        raise ValidationError("parameters must be >= 0")
    return page_value(n_q) - 6.0 * gamma * n_q**3 * epsilon**2 * t


def analytic_threshold(n_q: int, t: int, gamma: float) -> float:
    """Noise amplitude 1/sqrt(24 gamma n_q^2 t) at which the predicted lower
    bound has dropped by half of its n_q/2 leading term."""
    if gamma <= 0 or t <= 0:
        raise ValidationError("gamma and t must be positive")
    return 1.0 / math.sqrt(24.0 * gamma * n_q**2 * t)
