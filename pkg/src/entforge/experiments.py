"""Figure-reproduction campaigns: generation, spectrum, noise sweep, threshold.

All experiments are deterministic functions of (config, master_seed): noise
streams are derived per (experiment, size, grid point) with a hashed
sub-seed, Haar samples are seeded per index, and Monte-Carlo reductions use
a fixed batch order, so re-running a config reproduces every number.

Initial states: the map's parity symmetry (theta -> 2pi - theta, n -> -n)
makes |n=0> atypical, so the generic default eigenstate is |n=1>.
Entanglement-generation curves are additionally averaged over a small
ensemble of momentum eigenstates; a single state's step-to-step
fluctuations at n_q <= 6 otherwise swamp both the t=30 snapshot and the
convergence fit.  Noise sweeps use the single default eigenstate (ensemble
averaging there would multiply the trajectory cost).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError, von_neumann_entropy
from .entanglement import (
    enumerate_balanced_bipartitions,
    histogram,
    Histogram,
    haar_random_state,
    mixed_spectrum,
    page_value,
    pure_log_negativity,
    pure_spectrum,
    stats,
)
from .noise import derive_seed, recommend_realizations, run_trajectories
from .sawtooth import (
    MapParams,
    build_step_circuit,
    evolve_exact,
    momentum_basis_state,
    reference_gate_count,
)

#: paper-quoted fidelity-decay coefficient for its gate count convention
REFERENCE_GAMMA = 0.28
#: generic default initial momentum (n = 0 is fixed by the parity symmetry)
DEFAULT_INITIAL_MOMENTUM = 1
#: eigenstates averaged by the generation/spectrum experiments
GENERATION_ENSEMBLE = 32
#: relative drift between half- and full-sample means flagged as unconverged
CONVERGENCE_DRIFT = 0.02


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters shared by the experiment runners."""

    qubit_range: tuple[int, ...] = (4, 6, 8)
    k_param: float = 1.5
    steps: int = 30
    epsilon_grid: tuple[float, ...] = ()
    n_realizations: int | str = "auto"
    master_seed: int = 0
    workers: int | None = None
    strict: bool = False
    refine_threshold: bool = False
    haar_samples: int = 64
    threshold_fraction: float = 0.5

    def __post_init__(self) -> None:
        if not self.qubit_range:
            raise ValidationError("qubit_range must not be empty")
        if any(n % 2 or n < 2 for n in self.qubit_range):
            raise ValidationError("balanced bipartitions require even n_q >= 2")
        grid = tuple(float(e) for e in self.epsilon_grid)
        if any(e < 0 for e in grid):
            raise ValidationError("epsilon grid entries must be >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("epsilon grid must be strictly increasing")
        object.__setattr__(self, "epsilon_grid", grid)
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if not isinstance(self.n_realizations, int) and self.n_realizations != "auto":
            raise ValidationError("n_realizations must be an integer or 'auto'")
        if not 0 < self.threshold_fraction < 1:
            raise ValidationError("threshold_fraction must be in (0, 1)")

    def realizations_for(self, n_q: int) -> int:
        if self.n_realizations == "auto":
            return recommend_realizations(n_q, "upper")
        return int(self.n_realizations)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit summary; exponent_or_rate is the power-law exponent,
    decay rate, or line slope depending on the dataset."""

    exponent_or_rate: float
    prefactor: float
    r_squared: float
    point_count: int


def _r_squared(y: np.ndarray, predicted: np.ndarray) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    ss_res = float(np.sum((y - predicted) ** 2))
    return min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)


def fit_power_law(points) -> FitResult:
    """Fit y = a * x^b by least squares on (ln x, ln y)."""
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if xs.size < 3:
        raise ValidationError("power-law fit needs at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValidationError("power-law fit needs positive x and y")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    r2 = _r_squared(np.log(ys), slope * np.log(xs) + intercept)
    return FitResult(float(slope), float(math.exp(intercept)), r2, int(xs.size))


def fit_exponential(points) -> FitResult:
    """Fit y = a * exp(-rate * x) by least squares on (x, ln y); rate is
    positive for decaying data."""
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if xs.size < 3:
        raise ValidationError("exponential fit needs at least 3 points")
    if np.any(ys <= 0):
        raise ValidationError("exponential fit needs positive y")
    slope, intercept = np.polyfit(xs, np.log(ys), 1)
    r2 = _r_squared(np.log(ys), slope * xs + intercept)
    return FitResult(float(-slope), float(math.exp(intercept)), r2, int(xs.size))


def fit_linear(points) -> FitResult:
    """Plain line fit y = prefactor + exponent_or_rate * x."""
    xs = np.asarray([p[0] for p in points], dtype=np.float64)
    ys = np.asarray([p[1] for p in points], dtype=np.float64)
    if xs.size < 3:
        raise ValidationError("linear fit needs at least 3 points")
    slope, intercept = np.polyfit(xs, ys, 1)
    r2 = _r_squared(ys, slope * xs + intercept)
    return FitResult(float(slope), float(intercept), r2, int(xs.size))


def generation_ensemble(params: MapParams, count: int = GENERATION_ENSEMBLE):
    """Momentum eigenstates averaged by the generation experiment: all N of
    them when N <= count, else `count` momenta spread over the torus."""
    N = params.N
    if N <= count:
        momenta = range(-N // 2, N // 2)
    else:
        momenta = (int(-N // 2 + (j + 0.5) * N / count) for j in range(count))
    return [momentum_basis_state(params, n) for n in momenta]


# --- generation (Page convergence) --------------------------------------------


@dataclass(frozen=True)
class GenerationSeries:
    n_qubits: int
    times: np.ndarray
    mean_entropy: np.ndarray  # ensemble-averaged <E_AB>(t)
    deviation: np.ndarray  # |page - <E_AB>(t)|, the fitted series
    page: float
    tau: float
    tau_fit: FitResult


@dataclass(frozen=True)
class GenerationResult:
    series: dict[int, GenerationSeries]
    tau_vs_nq: FitResult | None


def _tau_window(deviation: np.ndarray) -> int:
    """End (exclusive) of the fit window: from t=1 until the deviation meets
    its saturation floor (RMS of the tail), but at least three points."""
    tail = deviation[-8:] if deviation.size >= 16 else deviation[deviation.size // 2:]
    floor = float(np.sqrt(np.mean(tail**2)))
    cut = deviation.size
    for t in range(1, deviation.size):
        if deviation[t] <= 1.5 * floor:
            cut = t
            break
    return min(max(cut, 4), deviation.size)


def run_generation(config: ExperimentConfig) -> GenerationResult:
    """Ensemble-averaged entanglement growth <E_AB>(t) and its convergence
    time scale per register size."""
    series = {}
    taus = []
    for n_q in config.qubit_range:
        params = MapParams(n_q, config.k_param)
        parts = enumerate_balanced_bipartitions(n_q)
        states = generation_ensemble(params)
        table = np.zeros((len(states), config.steps + 1))
        for i, state in enumerate(states):
            current = state
            for t in range(config.steps + 1):
                if t > 0:
                    current = evolve_exact(current, params, 1)
                table[i, t] = stats(pure_spectrum(current, config.workers)).mean
        mean_entropy = table.mean(axis=0)
        target = page_value(n_q)
        deviation = np.abs(target - mean_entropy)
        cut = _tau_window(deviation)
        window = [(float(t), float(deviation[t])) for t in range(1, cut)]
        tau_fit = fit_exponential(window)
        tau = 1.0 / tau_fit.exponent_or_rate
        series[n_q] = GenerationSeries(
            n_q,
            np.arange(config.steps + 1),
            mean_entropy,
            deviation,
            target,
            tau,
            tau_fit,
        )
        taus.append((float(n_q), tau))
    tau_vs_nq = fit_linear(taus) if len(taus) >= 3 else None
    return GenerationResult(series, tau_vs_nq)


# --- spectrum (entanglement distribution) --------------------------------------


@dataclass(frozen=True)
class SpectrumFamily:
    n_qubits: int
    family: str  # "sawtooth" | "haar"
    samples: np.ndarray  # pooled entanglement values over states x bipartitions
    sample_masks: np.ndarray  # bipartition mask per pooled sample
    mean: float
    std: float
    relative_std: float  # mean over states of the per-state sigma/mean
    histogram: Histogram


@dataclass(frozen=True)
class SpectrumResult:
    families: dict[tuple[int, str], SpectrumFamily]
    rate_fits: dict[str, FitResult]  # family -> fit of relative_std vs n_q


def _spectrum_family(n_q, family, state_list, workers) -> SpectrumFamily:
    pooled, masks, rels = [], [], []
    for state in state_list:
        samples = pure_spectrum(state, workers)
        values = [s.value for s in samples]
        pooled.extend(values)
        masks.extend(s.bipartition.a_mask for s in samples)
        rels.append(stats(values).relative_std)
    pooled = np.asarray(pooled)
    width = max((pooled.max() - pooled.min()) / 25.0, 1e-6)
    return SpectrumFamily(
        n_q,
        family,
        pooled,
        np.asarray(masks),
        float(pooled.mean()),
        float(pooled.std()),
        float(np.mean(rels)),
        histogram(pooled, width),
    )


def run_spectrum(config: ExperimentConfig) -> SpectrumResult:
    """Entanglement distributions of evolved vs Haar-random states, with the
    exponential width-vs-size fit for both families."""
    if len(config.qubit_range) < 3:
        raise ValidationError("spectrum rate fit needs at least 3 register sizes")
    if any(n < 4 for n in config.qubit_range):
        raise ValidationError("spectrum experiments need n_q >= 4")
    families = {}
    for n_q in config.qubit_range:
        params = MapParams(n_q, config.k_param)
        evolved = [
            evolve_exact(state, params, config.steps)
            for state in generation_ensemble(params)
        ]
        families[(n_q, "sawtooth")] = _spectrum_family(
            n_q, "sawtooth", evolved, config.workers
        )
        haar_states = [
            haar_random_state(n_q, derive_seed(config.master_seed, "haar", n_q, i))
            for i in range(config.haar_samples)
        ]
        families[(n_q, "haar")] = _spectrum_family(n_q, "haar", haar_states, config.workers)
    rate_fits = {}
    for family in ("sawtooth", "haar"):
        pts = [
            (float(n_q), families[(n_q, family)].relative_std)
            for n_q in config.qubit_range
        ]
        rate_fits[family] = fit_exponential(pts)
    return SpectrumResult(families, rate_fits)


# --- noise sweep (distillable-entanglement bounds vs epsilon) ------------------


@dataclass(frozen=True)
class BoundRow:
    n_qubits: int
    time: int
    epsilon: float
    bound_kind: str
    mean: float
    std: float
    relative_std: float
    stderr: float  # batch-means standard error of the mean
    n_realizations: int
    converged: bool


@dataclass(frozen=True)
class FidelityRow:
    n_qubits: int
    time: int
    epsilon: float
    fidelity: float
    stderr: float
    n_realizations: int


@dataclass(frozen=True)
class NoiseSweepResult:
    bound_rows: list[BoundRow]
    fidelity_rows: list[FidelityRow]
    pure_reference: dict[tuple[int, int, str], float]  # (n_q, t, kind) -> eps=0 mean
    total_entropy: dict[tuple[int, int, float], float]  # (n_q, t, eps) -> S(rho)
    ordering_margin: dict[tuple[int, int, float], float]  # min(upper - lower)
    initial_momentum: int

    def rows_for(self, n_q: int, time: int, kind: str) -> list[BoundRow]:
        rows = [
            r
            for r in self.bound_rows
            if r.n_qubits == n_q and r.time == time and r.bound_kind == kind
        ]
        return sorted(rows, key=lambda r: r.epsilon)


def _bound_stats_rows(n_q, time, eps, snapshot, n_real, workers):
    spec = mixed_spectrum(snapshot.rho, workers)
    margin = min(
        up.value - lo.value for lo, up in zip(spec.lower, spec.upper)
    )
    batch_means = {"lower": [], "upper": []}
    for rho in snapshot.batch_rhos:
        bspec = mixed_spectrum(rho, workers)
        batch_means["lower"].append(bspec.lower_stats.mean)
        batch_means["upper"].append(bspec.upper_stats.mean)
    half = {}
    for kind in ("lower", "upper"):
        k = max(1, len(batch_means[kind]) // 2)
        half[kind] = float(np.mean(batch_means[kind][:k]))
    rows = []
    for kind, kind_stats in (("lower", spec.lower_stats), ("upper", spec.upper_stats)):
        values = np.asarray(batch_means[kind])
        stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        drift = abs(kind_stats.mean - half[kind]) / max(abs(kind_stats.mean), 1e-12)
        rows.append(
            BoundRow(
                n_q,
                time,
                eps,
                kind,
                kind_stats.mean,
                kind_stats.std_dev,
                kind_stats.relative_std,
                stderr,
                n_real,
                bool(drift <= CONVERGENCE_DRIFT),
            )
        )
    return rows, margin


def run_noise_sweep(
    config: ExperimentConfig, snapshot_times: list[int] | None = None
) -> NoiseSweepResult:
    """Distillable-entanglement bound means over balanced bipartitions as a
    function of the noise amplitude, with batch-means error bars."""
    if not config.epsilon_grid:
        raise ValidationError("noise sweep needs a nonempty epsilon grid")
    times = sorted(set(snapshot_times if snapshot_times is not None else [config.steps]))
    bound_rows: list[BoundRow] = []
    fidelity_rows: list[FidelityRow] = []
    pure_reference: dict[tuple[int, int, str], float] = {}
    total_entropy: dict[tuple[int, int, float], float] = {}
    ordering_margin: dict[tuple[int, int, float], float] = {}
    for n_q in config.qubit_range:
        params = MapParams(n_q, config.k_param)
        init = momentum_basis_state(params, DEFAULT_INITIAL_MOMENTUM)
        parts = enumerate_balanced_bipartitions(n_q)
        for t in times:
            ideal = evolve_exact(init, params, t)
            pure_reference[(n_q, t, "lower")] = stats(pure_spectrum(ideal, config.workers)).mean
            pure_reference[(n_q, t, "upper")] = float(
                np.mean([pure_log_negativity(ideal, p) for p in parts])
            )
        n_real = config.realizations_for(n_q)
        circuit = build_step_circuit(params)
        for eps in config.epsilon_grid:
            seed = derive_seed(config.master_seed, "noise-sweep", n_q, f"{eps:.17g}")
            result = run_trajectories(
                params,
                max(times),
                eps,
                n_real,
                seed,
                init,
                snapshot_times=times,
                circuit=circuit,
            )
            for t in times:
                snap = result.snapshots[t]
                rows, margin = _bound_stats_rows(
                    n_q, t, eps, snap, n_real, config.workers
                )
                bound_rows.extend(rows)
                ordering_margin[(n_q, t, eps)] = margin
                total_entropy[(n_q, t, eps)] = von_neumann_entropy(snap.rho)
                fid_batches = np.array_split(snap.fidelities, min(8, n_real))
                fid_means = np.asarray([b.mean() for b in fid_batches if b.size])
                fid_err = (
                    float(fid_means.std(ddof=1) / math.sqrt(fid_means.size))
                    if fid_means.size > 1
                    else 0.0
                )
                fidelity_rows.append(
                    FidelityRow(n_q, t, eps, snap.mean_fidelity, fid_err, n_real)
                )
    return NoiseSweepResult(
        bound_rows,
        fidelity_rows,
        pure_reference,
        total_entropy,
        ordering_margin,
        DEFAULT_INITIAL_MOMENTUM,
    )


# --- threshold search -----------------------------------------------------------


class ThresholdBracketError(ValidationError):
    """The epsilon grid does not bracket the requested drop."""


@dataclass(frozen=True)
class ThresholdRow:
    n_qubits: int
    time: int
    bound_kind: str
    eps_threshold: float
    method: str  # "interpolated" | "refined"


@dataclass(frozen=True)
class ThresholdResult:
    rows: list[ThresholdRow]
    fits: dict[tuple[int, str], FitResult]  # (time, kind) -> power-law fit
    sweep: NoiseSweepResult


def interpolate_threshold(curve, target: float) -> float:
    """Log-linear (in epsilon) interpolation of the first crossing of target.

    ``curve`` is a list of (epsilon, mean) with epsilon increasing.
    """
    for (e1, m1), (e2, m2) in zip(curve, curve[1:]):
        if m1 >= target >= m2 and m1 > m2:
            x1, x2 = math.log(e1), math.log(e2)
            return math.exp(x1 + (x2 - x1) * (m1 - target) / (m1 - m2))
    raise ThresholdBracketError(
        f"no grid bracket around target {target:.4g}; curve spans "
        f"[{curve[-1][1]:.4g}, {curve[0][1]:.4g}]"
    )


def find_threshold(
    config: ExperimentConfig,
    bound_kind: str = "both",
    fraction: float | None = None,
    sweep: NoiseSweepResult | None = None,
    snapshot_times: list[int] | None = None,
) -> ThresholdResult:
    """Noise amplitude at which each bound mean drops to ``fraction`` of its
    eps=0 value, with a power-law fit of threshold vs register size.

    With ``refine_threshold`` set, one extra simulation at the interpolated
    amplitude tightens the bracket before the final interpolation.
    """
    fraction = config.threshold_fraction if fraction is None else fraction
    kinds = ("lower", "upper") if bound_kind == "both" else (bound_kind,)
    times = sorted(set(snapshot_times if snapshot_times is not None else [config.steps]))
    if sweep is None:
        sweep = run_noise_sweep(config, snapshot_times=times)
    rows: list[ThresholdRow] = []
    fits: dict[tuple[int, str], FitResult] = {}
    for t in times:
        for kind in kinds:
            for n_q in config.qubit_range:
                curve = [
                    (r.epsilon, r.mean) for r in sweep.rows_for(n_q, t, kind)
                ]
                target = fraction * sweep.pure_reference[(n_q, t, kind)]
                eps_star = interpolate_threshold(curve, target)
                method = "interpolated"
                if config.refine_threshold:
                    eps_star, method = _refine_threshold(
                        config, n_q, t, kind, curve, target, eps_star
                    )
                rows.append(ThresholdRow(n_q, t, kind, eps_star, method))
            pts = [
                (float(r.n_qubits), r.eps_threshold)
                for r in rows
                if r.time == t and r.bound_kind == kind
            ]
            if len(pts) >= 3:
                fits[(t, kind)] = fit_power_law(pts)
    return ThresholdResult(rows, fits, sweep)


def _refine_threshold(config, n_q, t, kind, curve, target, eps_star):
    params = MapParams(n_q, config.k_param)
    init = momentum_basis_state(params, DEFAULT_INITIAL_MOMENTUM)
    seed = derive_seed(config.master_seed, "noise-sweep", n_q, f"{eps_star:.17g}")
    result = run_trajectories(
        params,
        t,
        eps_star,
        config.realizations_for(n_q),
        seed,
        init,
        snapshot_times=[t],
    )
    spec = mixed_spectrum(result.snapshots[t].rho, config.workers)
    mean = spec.lower_stats.mean if kind == "lower" else spec.upper_stats.mean
    refined_curve = sorted(curve + [(eps_star, mean)])
    return interpolate_threshold(refined_curve, target), "refined"


# --- fidelity-decay calibration --------------------------------------------------


@dataclass(frozen=True)
class GammaCalibration:
    gamma_actual: float  # slope against eps^2 * n_g_actual * t
    gamma_reference_convention: float  # slope against eps^2 * (3 n_q^2 + n_q) * t
    fit_actual: FitResult
    fit_reference: FitResult
    points: list[tuple[int, int, float, float]]  # (n_q, t, eps, mean fidelity)


def calibrate_gamma(
    config: ExperimentConfig,
    snapshot_times: list[int] | None = None,
    sweep: NoiseSweepResult | None = None,
) -> GammaCalibration:
    """Slope of -ln F against eps^2 * n_g * t pooled over the grid, reported
    for both the built decomposition's gate count and the reference
    convention 3 n_q^2 + n_q."""
    if not config.epsilon_grid:
        raise ValidationError("gamma calibration needs a nonempty epsilon grid")
    times = sorted(set(snapshot_times if snapshot_times is not None else [config.steps]))
    points: list[tuple[int, int, float, float]] = []
    if sweep is None:
        for n_q in config.qubit_range:
            params = MapParams(n_q, config.k_param)
            init = momentum_basis_state(params, DEFAULT_INITIAL_MOMENTUM)
            n_real = (
                recommend_realizations(n_q, "lower")
                if config.n_realizations == "auto"
                else int(config.n_realizations)
            )
            circuit = build_step_circuit(params)
            for eps in config.epsilon_grid:
                seed = derive_seed(config.master_seed, "gamma", n_q, f"{eps:.17g}")
                result = run_trajectories(
                    params,
                    max(times),
                    eps,
                    n_real,
                    seed,
                    init,
                    snapshot_times=times,
                    circuit=circuit,
                )
                for t in times:
                    points.append((n_q, t, eps, result.snapshots[t].mean_fidelity))
    else:
        for row in sweep.fidelity_rows:
            points.append((row.n_qubits, row.time, row.epsilon, row.fidelity))

    xs_actual, xs_reference, ys, kept = [], [], [], []
    for n_q, t, eps, fid in points:
        x_ref = eps**2 * reference_gate_count(n_q) * t
        if REFERENCE_GAMMA * x_ref > 0.5:  # outside the perturbative regime
            continue
        n_g = build_step_circuit(MapParams(n_q, config.k_param)).gate_count
        xs_actual.append(eps**2 * n_g * t)
        xs_reference.append(x_ref)
        ys.append(-math.log(max(fid, 1e-300)))
        kept.append((n_q, t, eps, fid))
    if len(kept) < 3:
        raise ValidationError(
            "fewer than 3 grid points inside the perturbative regime"
        )
    fit_actual = fit_linear(list(zip(xs_actual, ys)))
    fit_reference = fit_linear(list(zip(xs_reference, ys)))
    return GammaCalibration(
        fit_actual.exponent_or_rate,
        fit_reference.exponent_or_rate,
        fit_actual,
        fit_reference,
        kept,
    )
