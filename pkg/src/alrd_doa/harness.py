"""Monte Carlo evaluation: resolution probability, RMSE, CRB and operation counts."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import logging
import multiprocessing

import numpy as np

from .alrd import AlrdConfig, alrd_scan
from .baselines import METHODS as BASELINE_METHODS
from .baselines import BaselineConfig, baseline_estimate
from .errors import DomainError, HarnessError, SingularityError
from .malrd import malrd_scan
from .signal_model import UlaGeometry, generate_snapshots, make_rng, steering_matrix
from .spectrum import DEFAULT_GRID, angle_grid, find_peaks

log = logging.getLogger(__name__)

RLS_METHODS = ("alrd", "malrd")
ALL_METHODS = RLS_METHODS + BASELINE_METHODS
FALLBACK_DOA_DEG = 90.0


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator in a sweep.

    ``rls`` configures ALRD/MALRD; ``use_fba`` and ``num_sources`` configure
    the baselines (``num_sources=None`` means the scenario's K).
    """

    method: str
    rls: AlrdConfig = None
    use_fba: bool = True
    num_sources: int = None
    label: str = None

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise DomainError(f"unknown method {self.method!r}; expected one of {ALL_METHODS}")
        if self.method in RLS_METHODS and self.rls is None:
            object.__setattr__(self, "rls", AlrdConfig())
        if self.label is None:
            object.__setattr__(self, "label", self.method)


@dataclass
class TrialResult:
    estimated_doas: np.ndarray
    resolved: bool
    squared_errors: np.ndarray
    op_count: int
    batch_hash: str = ""
    failed: bool = False


@dataclass
class SweepReport:
    method: str
    snr_grid_db: list
    resolution_prob: list
    rmse_deg: list
    rmse_resolved_only_deg: list
    crb_deg: list
    trials: int
    mean_op_count: list
    config: dict = field(default_factory=dict)
    results: list = field(default_factory=list, repr=False)


def half_gaps(true_doas):
    """Per-source resolution radius: half the gap to the previous source (the next one for k=1)."""
    t = np.sort(np.asarray(true_doas, dtype=float))
    if t.size == 1:
        return np.array([np.inf])
    gaps = np.abs(np.diff(t))
    return np.concatenate([[gaps[0]], gaps]) / 2.0


def check_resolution(true_doas, est_doas):
    t = np.sort(np.asarray(true_doas, dtype=float))
    e = np.sort(np.asarray(est_doas, dtype=float))
    if t.shape != e.shape:
        raise DomainError(f"expected {t.size} estimates, got {e.size}")
    return bool(np.all(np.abs(e - t) < half_gaps(t)))


def rmse(trials, true_doas):
    """``sqrt(sum of squared errors / (trials * K))`` over all given trials, degrees."""
    if len(trials) == 0:
        raise DomainError("rmse needs at least one trial")
    k = len(true_doas)
    total = sum(float(np.sum(tr.squared_errors)) for tr in trials)
    return float(np.sqrt(total / (len(trials) * k)))


def crb_reference(scenario, geometry):
    """Stochastic (unconditional) CRB, RMS over sources, in degrees.

    Uses the Gaussian-source bound for the scenario's source covariance
    (unit correlation structure from ``correlated_pair``) and white noise.
    This is a reference curve, not a bound specific to BPSK sources.
    """
    m = geometry.num_sensors
    k = scenario.num_sources
    if k >= m:
        raise DomainError("CRB needs K < M")
    theta = np.deg2rad(scenario.doas_deg)
    A = steering_matrix(geometry, scenario.doas_deg)
    idx = np.arange(m)[:, None]
    dA = A * (1j * 2.0 * np.pi * geometry.spacing_ratio * idx * np.sin(theta)[None, :])
    P = source_covariance(scenario)
    sigma2 = scenario.sigma_n2
    R = A @ P @ A.conj().T + sigma2 * np.eye(m)
    try:
        Rinv = np.linalg.inv(R)
        proj = np.eye(m) - A @ np.linalg.solve(A.conj().T @ A, A.conj().T)
    except np.linalg.LinAlgError as exc:
        raise SingularityError("coincident directions make the Fisher information singular") from exc
    H = dA.conj().T @ proj @ dA
    G = P @ A.conj().T @ Rinv @ A @ P
    fim = (2.0 * scenario.num_snapshots / sigma2) * np.real(H * G.T)
    if np.linalg.cond(fim) > 1e14:
        raise SingularityError("Fisher information is singular")
    crb = np.linalg.inv(fim)
    return float(np.rad2deg(np.sqrt(np.mean(np.diag(crb)))))


def source_covariance(scenario):
    k = scenario.num_sources
    P = scenario.source_power * np.eye(k)
    if scenario.correlated_pair is not None:
        p, q = scenario.correlated_pair
        P[p, q] = P[q, p] = scenario.correlation_coeff * scenario.source_power
    return P


def estimate(spec, batch, geometry, num_sources, grid=DEFAULT_GRID):
    """Run one estimator on a batch; returns ``(angles, op_count)``."""
    start, stop, step = grid
    if spec.method in RLS_METHODS:
        scan = alrd_scan if spec.method == "alrd" else malrd_scan
        spectrum = scan(spec.rls, batch, geometry, grid=angle_grid(*grid))
        return find_peaks(spectrum, num_sources), spectrum.op_count
    k = spec.num_sources or num_sources
    cfg = BaselineConfig(k, spec.use_fba, start, stop, step)
    return baseline_estimate(batch, geometry, cfg, spec.method, return_ops=True)


def run_trial(spec, batch, geometry, true_doas, grid=DEFAULT_GRID):
    true = np.sort(np.asarray(true_doas, dtype=float))
    k = true.size
    try:
        est, ops = estimate(spec, batch, geometry, k, grid)
        failed = False
    except (SingularityError, np.linalg.LinAlgError) as exc:
        log.warning("%s failed on a trial: %s", spec.label, exc)
        est, ops, failed = np.full(k, FALLBACK_DOA_DEG), 0, True
    est = np.sort(np.asarray(est, dtype=float))
    return TrialResult(
        estimated_doas=est,
        resolved=(not failed) and check_resolution(true, est),
        squared_errors=(est - true) ** 2,
        op_count=int(ops),
        batch_hash=batch.digest(),
        failed=failed,
    )


def _trial_task(args):
    specs, geometry, scenario, master_seed, snr_idx, trial_idx, grid = args
    rng = make_rng(master_seed, snr_idx, trial_idx)
    batch = generate_snapshots(geometry, scenario, rng)
    return [run_trial(spec, batch, geometry, scenario.doas_deg, grid) for spec in specs]


def run_sweep(specs, scenario, geometry, snr_list, trials, master_seed, grid=DEFAULT_GRID, workers=1):
    """Paired Monte Carlo sweep: every method sees the same batch in each trial.

    The batch of trial ``t`` at SNR index ``s`` is drawn from
    ``make_rng(master_seed, s, t)``, so results do not depend on ``workers``.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    specs = list(specs)
    snr_list = [float(s) for s in snr_list]
    tasks = [
        (specs, geometry, scenario.with_snr(snr), master_seed, si, t, tuple(grid))
        for si, snr in enumerate(snr_list)
        for t in range(trials)
    ]
    if workers and workers > 1:
        # spawn: the OpenMP threading layer cannot survive fork()
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            outcomes = list(pool.map(_trial_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        outcomes = [_trial_task(t) for t in tasks]

    reports = []
    for mi, spec in enumerate(specs):
        rep = SweepReport(
            method=spec.label,
            snr_grid_db=snr_list,
            resolution_prob=[],
            rmse_deg=[],
            rmse_resolved_only_deg=[],
            crb_deg=[],
            trials=trials,
            mean_op_count=[],
            config=_echo(spec, scenario, geometry, grid, master_seed),
        )
        for si, snr in enumerate(snr_list):
            res = [outcomes[si * trials + t][mi] for t in range(trials)]
            if all(r.failed for r in res):
                raise HarnessError(f"{spec.label}: every trial failed at SNR {snr} dB")
            resolved = [r for r in res if r.resolved]
            rep.resolution_prob.append(len(resolved) / trials)
            rep.rmse_deg.append(rmse(res, scenario.doas_deg))
            rep.rmse_resolved_only_deg.append(rmse(resolved, scenario.doas_deg) if resolved else float("nan"))
            rep.crb_deg.append(crb_reference(scenario.with_snr(snr), geometry))
            rep.mean_op_count.append(float(np.mean([r.op_count for r in res])))
            rep.results.append(res)
        reports.append(rep)
    return reports


def _echo(spec, scenario, geometry, grid, seed):
    echo = {
        "method": spec.method,
        "M": geometry.num_sensors,
        "N": scenario.num_snapshots,
        "doas": list(scenario.doas_deg),
        "grid": list(grid),
        "seed": int(seed),
    }
    if spec.method in RLS_METHODS:
        c = spec.rls
        echo.update(I=c.basis_len, D=c.rank, alpha=c.forget, delta=c.init_scale, delta_aux=c.aux_init_scale)
    else:
        echo.update(fba=spec.use_fba, K=spec.num_sources or scenario.num_sources)
    return echo


def complexity_probe(method, M, I, D, N, grid, vary, values, seed=0):
    """Log-log slope of measured multiply-accumulates against one of I, D or N.

    Runs the estimator on white-noise batches; returns ``(slope, counts)``.
    """
    if vary not in ("I", "D", "N"):
        raise DomainError("vary must be one of 'I', 'D', 'N'")
    if method not in RLS_METHODS:
        raise DomainError("complexity_probe instruments the RLS estimators only")
    scan = alrd_scan if method == "alrd" else malrd_scan
    geometry = UlaGeometry(M)
    counts = []
    for v in values:
        params = {"I": I, "D": D, "N": N, vary: int(v)}
        rng = make_rng(seed, int(v))
        shape = (M, params["N"])
        data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        cfg = AlrdConfig(basis_len=params["I"], rank=params["D"])
        counts.append(scan(cfg, data, geometry, grid=np.asarray(grid, float)).op_count)
    slope = np.polyfit(np.log(values), np.log(counts), 1)[0]
    return float(slope), counts
