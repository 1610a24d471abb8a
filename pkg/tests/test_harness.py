import numpy as np
import pytest

from alrd_doa import harness
from alrd_doa.alrd import AlrdConfig
from alrd_doa.errors import DomainError, HarnessError, SingularityError
from alrd_doa.harness import (
    EstimatorSpec,
    TrialResult,
    check_resolution,
    complexity_probe,
    crb_reference,
    half_gaps,
    rmse,
    run_sweep,
)
from alrd_doa.signal_model import SourceScenario, UlaGeometry, steering_matrix


def _trial(errors):
    e = np.asarray(errors, dtype=float)
    return TrialResult(estimated_doas=e, resolved=True, squared_errors=e**2, op_count=0)


def test_resolution_examples():
    assert check_resolution([30, 40], [33, 41])
    assert not check_resolution([30, 40], [36, 41])
    assert check_resolution([10, 25, 90], [10, 25, 90])


def test_resolution_first_source_uses_next_gap():
    np.testing.assert_allclose(half_gaps([30, 40, 60]), [5, 5, 10])
    assert not check_resolution([30, 40, 60], [25, 40, 60])
    assert check_resolution([30, 40, 60], [25.5, 40, 60])


def test_resolution_ignores_estimate_order():
    rng = np.random.default_rng(0)
    true = [20.0, 45.0, 50.0, 90.0]
    est = np.array([21.0, 44.0, 51.0, 88.0])
    for _ in range(10):
        assert check_resolution(true, rng.permutation(est)) == check_resolution(true, est)


def test_resolution_length_mismatch():
    with pytest.raises(DomainError):
        check_resolution([1, 2], [1])


def test_rmse_examples():
    assert rmse([_trial([0.0])], [5.0]) == 0.0
    assert rmse([_trial([2.0])], [5.0]) == pytest.approx(2.0)
    assert rmse([_trial([1, 1]), _trial([1, 3])], [1, 2]) == pytest.approx(np.sqrt(3.0))
    with pytest.raises(DomainError):
        rmse([], [1.0])


def test_rmse_matches_brute_force_double_sum():
    rng = np.random.default_rng(1)
    errs = rng.normal(size=(17, 4))
    total = 0.0
    for row in errs:
        for e in row:
            total += e * e
    assert rmse([_trial(r) for r in errs], range(4)) == pytest.approx(np.sqrt(total / 68), abs=1e-12)


def _fd_crb(scenario, g, h=1e-6):
    """CRB from a finite-difference Gaussian Fisher matrix over all parameters.

    Parameters: DOAs (rad), the Hermitian source covariance (real and
    imaginary parts), and the noise power.
    """
    k, m, n = scenario.num_sources, g.num_sensors, scenario.num_snapshots
    P0 = harness.source_covariance(scenario)
    theta0 = np.deg2rad(scenario.doas_deg)

    def cov(params):
        th = params[:k]
        P = np.zeros((k, k), complex)
        idx = k
        for i in range(k):
            P[i, i] = params[idx]
            idx += 1
        for i in range(k):
            for j in range(i + 1, k):
                P[i, j] = params[idx] + 1j * params[idx + 1]
                P[j, i] = np.conj(P[i, j])
                idx += 2
        A = steering_matrix(g, np.rad2deg(th))
        return A @ P @ A.conj().T + params[-1] * np.eye(m)

    p0 = list(theta0) + list(np.diag(P0).real)
    for i in range(k):
        for j in range(i + 1, k):
            p0 += [P0[i, j].real, P0[i, j].imag]
    p0 = np.array(p0 + [scenario.sigma_n2])
    R0inv = np.linalg.inv(cov(p0))
    derivs = []
    for i in range(p0.size):
        e = np.zeros_like(p0)
        e[i] = h
        derivs.append((cov(p0 + e) - cov(p0 - e)) / (2 * h))
    F = np.array([[n * np.trace(R0inv @ Di @ R0inv @ Dj).real for Dj in derivs] for Di in derivs])
    crb = np.linalg.inv(F)[:k, :k]
    return float(np.rad2deg(np.sqrt(np.mean(np.diag(crb)))))


def test_crb_matches_finite_difference_fisher_single_source():
    g = UlaGeometry(20)
    sc = SourceScenario((60.0,), 50, snr_db=20.0)
    assert crb_reference(sc, g) == pytest.approx(_fd_crb(sc, g), rel=0.01)


def test_crb_matches_finite_difference_fisher_correlated_pair():
    g = UlaGeometry(8)
    sc = SourceScenario((50.0, 75.0, 110.0), 30, snr_db=5.0, correlated_pair=(0, 1), correlation_coeff=0.7)
    assert crb_reference(sc, g) == pytest.approx(_fd_crb(sc, g), rel=0.01)


def test_crb_scaling():
    g = UlaGeometry(12)
    sc = SourceScenario((40.0, 70.0), 20, snr_db=0.0)
    vals = [crb_reference(sc.with_snr(s), g) for s in (-10, 0, 10, 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    doubled = SourceScenario((40.0, 70.0), 40, snr_db=0.0)
    assert crb_reference(doubled, g) == pytest.approx(crb_reference(sc, g) / np.sqrt(2), rel=1e-10)


def test_crb_errors():
    with pytest.raises(DomainError):
        crb_reference(SourceScenario((10.0, 20.0, 30.0), 5, snr_db=0.0), UlaGeometry(3))


SMALL = SourceScenario((50.0, 90.0), 20, snr_db=10.0)
SMALL_GRID = (1.0, 179.0, 1.0)


def _specs():
    rls = AlrdConfig(basis_len=4, rank=2)
    return [EstimatorSpec("malrd", rls=rls), EstimatorSpec("music"), EstimatorSpec("esprit", label="esp")]


def test_sweep_shapes_and_resolution_ratio():
    g = UlaGeometry(10)
    reps = run_sweep(_specs(), SMALL, g, [0.0], 1, 3, grid=SMALL_GRID)
    assert [r.method for r in reps] == ["malrd", "music", "esp"]
    for r in reps:
        assert len(r.resolution_prob) == len(r.rmse_deg) == len(r.crb_deg) == 1
    reps = run_sweep(_specs(), SMALL, g, [-5.0, 5.0], 6, 3, grid=SMALL_GRID)
    for r in reps:
        for res, p in zip(r.results, r.resolution_prob):
            assert p == sum(t.resolved for t in res) / 6
        assert r.config["seed"] == 3 and r.config["M"] == 10


def test_sweep_is_deterministic_paired_and_worker_independent():
    g = UlaGeometry(10)
    a = run_sweep(_specs(), SMALL, g, [0.0, 10.0], 4, 11, grid=SMALL_GRID)
    b = run_sweep(_specs(), SMALL, g, [0.0, 10.0], 4, 11, grid=SMALL_GRID, workers=2)
    for ra, rb in zip(a, b):
        assert ra.rmse_deg == rb.rmse_deg and ra.resolution_prob == rb.resolution_prob
    for si in range(2):
        for t in range(4):
            hashes = {rep.results[si][t].batch_hash for rep in a}
            assert len(hashes) == 1
    assert a[0].results[0][0].batch_hash != a[0].results[0][1].batch_hash


def test_failed_trials_count_as_unresolved(monkeypatch):
    real = harness.estimate
    calls = {"n": 0}

    def flaky(spec, *args, **kw):
        calls["n"] += 1
        if calls["n"] % 2:
            raise SingularityError("boom")
        return real(spec, *args, **kw)

    monkeypatch.setattr(harness, "estimate", flaky)
    rep = run_sweep([EstimatorSpec("music")], SMALL, UlaGeometry(10), [20.0], 4, 0, grid=SMALL_GRID)[0]
    failed = [t for t in rep.results[0] if t.failed]
    assert len(failed) == 2 and not any(t.resolved for t in failed)
    assert rep.resolution_prob == [0.5]
    np.testing.assert_allclose(failed[0].estimated_doas, [90.0, 90.0])


def test_all_trials_failing_is_fatal(monkeypatch):
    def broken(*args, **kw):
        raise SingularityError("boom")

    monkeypatch.setattr(harness, "estimate", broken)
    with pytest.raises(HarnessError):
        run_sweep([EstimatorSpec("capon")], SMALL, UlaGeometry(10), [0.0], 2, 0, grid=SMALL_GRID)


def test_sweep_rejects_zero_trials():
    with pytest.raises(DomainError):
        run_sweep(_specs(), SMALL, UlaGeometry(10), [0.0], 0, 0)


def test_unknown_method():
    with pytest.raises(DomainError):
        EstimatorSpec("jio")


@pytest.mark.parametrize("method", ["alrd", "malrd"])
def test_complexity_linear_in_snapshots(method):
    slope, counts = complexity_probe(method, 24, 6, 3, 10, [40.0, 80.0], "N", [10, 20, 40])
    assert slope == pytest.approx(1.0, abs=1e-9)
    assert counts[1] == 2 * counts[0]


def test_complexity_probe_validation():
    with pytest.raises(DomainError):
        complexity_probe("music", 24, 6, 3, 10, [40.0], "N", [10, 20])
    with pytest.raises(DomainError):
        complexity_probe("alrd", 24, 6, 3, 10, [40.0], "M", [10, 20])
