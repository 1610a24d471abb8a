"""Angle grids, spectra and peak picking."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_GRID = (0.3, 179.7, 0.3)


@dataclass
class Spectrum:
    angles_deg: np.ndarray
    power: np.ndarray
    diagnostics: list = field(default_factory=list)
    op_count: int = 0
    basis_ops: int = 0
    aux_ops: int = 0

    def __post_init__(self):
        self.angles_deg = np.asarray(self.angles_deg, dtype=float)
        self.power = np.asarray(self.power, dtype=float)
        if self.angles_deg.shape != self.power.shape:
            raise DomainError("angles and powers must have equal length")

    def __len__(self):
        return self.angles_deg.size


def angle_grid(start=DEFAULT_GRID[0], stop=DEFAULT_GRID[1], step=DEFAULT_GRID[2]):
    """Inclusive grid ``start, start+step, ..., stop`` (stop kept if on-grid)."""
    if not step > 0:
        raise DomainError("grid step must be positive")
    if stop < start:
        raise DomainError("grid stop precedes start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    grid = start + step * np.arange(n)
    if grid[0] <= 0.0 or grid[-1] >= 180.0:
        raise DomainError("grid angles must lie in (0, 180) degrees")
    return grid


def find_peaks(spectrum, k):
    """Angles of the ``k`` strongest local maxima, sorted ascending.

    A grid point is a local maximum if its power strictly exceeds both
    neighbours (one neighbour at the ends). If fewer than ``k`` exist the
    remaining slots take the strongest unselected points. Ties go to the
    lower angle.
    """
    angles = spectrum.angles_deg
    p = spectrum.power
    n = p.size
    if k > n:
        raise DomainError(f"cannot pick {k} peaks from a grid of {n} points")
    if k <= 0:
        return np.empty(0)
    if n == 1:
        return angles.copy()
    left = np.concatenate([[True], p[1:] > p[:-1]])
    right = np.concatenate([p[:-1] > p[1:], [True]])
    is_max = left & right
    order = np.argsort(-p, kind="stable")
    chosen = [i for i in order if is_max[i]][:k]
    if len(chosen) < k:
        taken = set(chosen)
        chosen += [i for i in order if i not in taken][: k - len(chosen)]
    return np.sort(angles[chosen])
