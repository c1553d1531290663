"""First-slot snapshot generation: Bob and Eve transmit, Alice records N_s snapshots."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry, uplink_steering


@dataclass(frozen=True)
class UplinkScenario:
    """Ground truth for one uplink observation window.

    ``noise_var`` is the true per-element noise variance; the estimator's
    noise-variance estimate is kept separately.
    """

    theta_b: float
    theta_e: float
    power_b: float = 1.0
    power_e: float = 1.0
    noise_var: float = 0.1
    n_snapshots: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.power_b < 0 or self.power_e < 0:
            raise ValueError("source powers must be non-negative")
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")
        if self.theta_b == self.theta_e:
            raise ValueError("Bob and Eve must arrive from different angles")


@dataclass(frozen=True)
class SnapshotSet:
    samples: np.ndarray  # N x N_s
    scenario: UplinkScenario

    @property
    def n_elements(self) -> int:
        return self.samples.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.samples.shape[1]


def _cn(rng: np.random.Generator, var: float, shape) -> np.ndarray:
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_snapshots(scn: UplinkScenario, geom: ArrayGeometry, rng=None) -> SnapshotSet:
    """Draw ``r[k] = s_b[k] a(theta_b) + s_e[k] a(theta_e) + n[k]`` for k = 1..N_s.

    Source symbols are independent circular complex Gaussians with variances
    ``power_b`` and ``power_e``; noise is ``CN(0, noise_var I)``. The draw is
    a pure function of ``scn.seed`` unless an explicit generator is passed.
    """
    if scn.n_snapshots < 1:
        raise ValueError("need at least one snapshot")
    rng = np.random.default_rng(scn.seed) if rng is None else rng
    n, ns = geom.n_elements, scn.n_snapshots
    steer = uplink_steering(np.array([scn.theta_b, scn.theta_e]), geom)
    sources = np.vstack([_cn(rng, scn.power_b, ns), _cn(rng, scn.power_e, ns)])
    noise = _cn(rng, scn.noise_var, (n, ns))
    return SnapshotSet(steer @ sources + noise, scn)


def dump_snapshots(snap: SnapshotSet, path) -> None:
    """Write samples as CSV, one row per element, re/im interleaved per snapshot."""
    s = snap.samples
    inter = np.empty((s.shape[0], 2 * s.shape[1]))
    inter[:, 0::2] = s.real
    inter[:, 1::2] = s.imag
    np.savetxt(Path(path), inter, delimiter=",", fmt="%.17g")


def load_snapshots(path) -> np.ndarray:
    inter = np.atleast_2d(np.loadtxt(Path(path), delimiter=","))
    return inter[:, 0::2] + 1j * inter[:, 1::2]
