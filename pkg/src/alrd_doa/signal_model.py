"""Uniform linear array snapshot simulator.

Sources are real BPSK symbols of amplitude ``sigma_s``, except for an optional
correlated pair whose samples follow a Gaussian first-order autoregressive
recursion. Noise is circular complex white Gaussian.
"""
from dataclasses import dataclass, field, replace
import hashlib

import numpy as np

from .errors import DomainError

DEFAULT_DOAS_DEG = tuple(float(x) for x in np.arange(20.0, 133.0, 8.0))


@dataclass(frozen=True)
class UlaGeometry:
    num_sensors: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if int(self.num_sensors) != self.num_sensors or self.num_sensors < 2:
            raise DomainError(f"num_sensors must be an integer >= 2, got {self.num_sensors}")
        if not self.spacing_ratio > 0:
            raise DomainError(f"spacing_ratio must be positive, got {self.spacing_ratio}")


@dataclass(frozen=True)
class SourceScenario:
    """Source directions, powers and the snapshot budget of one experiment.

    Exactly one of ``noise_power`` and ``snr_db`` should be given; when
    ``snr_db`` is used the noise power is ``source_power * 10**(-snr_db/10)``.
    ``correlated_pair`` holds 0-based source indices ``(p, q)`` where row ``q``
    is generated from row ``p`` with coefficient ``correlation_coeff``.
    """

    doas_deg: tuple
    num_snapshots: int
    source_power: float = 1.0
    snr_db: float = None
    noise_power: float = None
    correlated_pair: tuple = None
    correlation_coeff: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        doas = tuple(float(x) for x in np.atleast_1d(self.doas_deg))
        object.__setattr__(self, "doas_deg", doas)
        if len(doas) < 1:
            raise DomainError("at least one source direction is required")
        if any(not 0.0 < x < 180.0 for x in doas):
            raise DomainError(f"source directions must lie in (0, 180) degrees: {doas}")
        if any(b <= a for a, b in zip(doas, doas[1:])):
            raise DomainError(f"source directions must be strictly ascending: {doas}")
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise DomainError(f"num_snapshots must be a positive integer, got {self.num_snapshots}")
        if self.source_power < 0:
            raise DomainError("source_power must be non-negative")
        if (self.snr_db is None) == (self.noise_power is None):
            raise DomainError("give exactly one of snr_db and noise_power")
        if self.noise_power is not None and self.noise_power < 0:
            raise DomainError("noise_power must be non-negative")
        if self.correlated_pair is not None:
            pair = tuple(int(i) for i in self.correlated_pair)
            object.__setattr__(self, "correlated_pair", pair)
            k = len(doas)
            if len(pair) != 2 or pair[0] == pair[1] or not all(0 <= i < k for i in pair):
                raise DomainError(f"correlated_pair must be two distinct source indices < {k}")
            if not 0.0 <= self.correlation_coeff < 1.0:
                raise DomainError("correlation_coeff must lie in [0, 1)")

    @property
    def num_sources(self):
        return len(self.doas_deg)

    @property
    def sigma_n2(self):
        if self.noise_power is not None:
            return float(self.noise_power)
        return float(self.source_power) * 10.0 ** (-float(self.snr_db) / 10.0)

    def with_snr(self, snr_db, rng_seed=None):
        return replace(
            self,
            snr_db=float(snr_db),
            noise_power=None,
            rng_seed=self.rng_seed if rng_seed is None else rng_seed,
        )


@dataclass(frozen=True)
class SnapshotBatch:
    data: np.ndarray
    scenario: SourceScenario
    geometry: UlaGeometry
    sources: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.data.shape != (self.geometry.num_sensors, self.scenario.num_snapshots):
            raise DomainError(
                f"batch shape {self.data.shape} does not match "
                f"({self.geometry.num_sensors}, {self.scenario.num_snapshots})"
            )

    def digest(self):
        """SHA-256 of the raw sample bytes; used to verify paired trials."""
        return hashlib.sha256(np.ascontiguousarray(self.data).tobytes()).hexdigest()


def large_array_scenario(snr_db=15.0, rng_seed=0):
    """The large-array scenario: 15 sources, first two correlated (rho 0.7), N=20."""
    return SourceScenario(
        doas_deg=DEFAULT_DOAS_DEG,
        num_snapshots=20,
        source_power=1.0,
        snr_db=snr_db,
        correlated_pair=(0, 1),
        correlation_coeff=0.7,
        rng_seed=rng_seed,
    )


def make_rng(seed, *keys):
    """Independent generator for ``(seed, *keys)``; keys are e.g. SNR and trial indices."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def steering_vector(geometry, theta_deg):
    theta_deg = float(theta_deg)
    if not 0.0 < theta_deg < 180.0:
        raise DomainError(f"theta must lie in (0, 180) degrees, got {theta_deg}")
    return steering_matrix(geometry, [theta_deg])[:, 0]


def steering_matrix(geometry, thetas_deg):
    """Columns are steering vectors for each angle in ``thetas_deg`` (M x G)."""
    thetas = np.asarray(thetas_deg, dtype=float)
    m = np.arange(geometry.num_sensors)[:, None]
    phase = -2.0 * np.pi * geometry.spacing_ratio * np.cos(np.deg2rad(thetas))[None, :]
    return np.exp(1j * m * phase)


def generate_source_matrix(scenario, rng):
    k, n = scenario.num_sources, scenario.num_snapshots
    sigma_s = np.sqrt(scenario.source_power)
    s = sigma_s * rng.choice(np.array([-1.0, 1.0]), size=(k, n))
    if scenario.correlated_pair is not None:
        p, q = scenario.correlated_pair
        rho = scenario.correlation_coeff
        lead = sigma_s * rng.standard_normal(n)
        innov = sigma_s * rng.standard_normal(n)
        s[p] = lead
        s[q] = rho * lead + np.sqrt(1.0 - rho**2) * innov
    return s.astype(complex)


def generate_snapshots(geometry, scenario, rng=None):
    """Draw an M x N batch ``r(i) = sum_k a(theta_k) s_k(i) + n(i)``.

    When ``rng`` is omitted a generator is seeded from ``scenario.rng_seed``.
    """
    if rng is None:
        rng = make_rng(scenario.rng_seed)
    s = generate_source_matrix(scenario, rng)
    a = steering_matrix(geometry, scenario.doas_deg)
    shape = (geometry.num_sensors, scenario.num_snapshots)
    scale = np.sqrt(scenario.sigma_n2 / 2.0)
    noise = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return SnapshotBatch(data=a @ s + noise, scenario=scenario, geometry=geometry, sources=s)
