"""Subspace DOA and SNR estimation with Root-MUSIC."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .array_model import ArrayGeometry, uplink_steering
from .uplink import SnapshotSet

# roots with |z| below this count as strictly inside the unit circle
INSIDE_TOL = 1e-12


class EstimationError(RuntimeError):
    """Raised when the subspace estimator cannot produce M source angles."""


class Label(str, enum.Enum):
    BOB = "bob"
    EVE = "eve"


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]
    n_sources: int

    @property
    def n_elements(self) -> int:
        return self.eigenvalues.size

    @property
    def signal_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, : self.n_sources]

    @property
    def noise_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, self.n_sources :]


@dataclass(frozen=True)
class RootMusicResult:
    angles: np.ndarray
    roots: np.ndarray  # the selected roots, same order as angles
    clamped: bool


@dataclass(frozen=True)
class SourceEstimate:
    angle_est: float
    snr_est: float
    label: Label
    eigenvalue_index: int
    degenerate: bool = False
    ambiguous: bool = False


def sample_covariance(snap) -> np.ndarray:
    """``(1/N_s) sum_k r[k] r[k]^H``, symmetrised to be exactly Hermitian."""
    x = snap.samples if isinstance(snap, SnapshotSet) else np.asarray(snap)
    x = np.atleast_2d(x.T).T if x.ndim == 1 else x
    r = x @ x.conj().T / x.shape[1]
    return 0.5 * (r + r.conj().T)


def eigendecompose(r: np.ndarray, n_sources: int, tol: float = 1e-8) -> EigenSystem:
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("covariance must be square")
    scale = max(np.linalg.norm(r), 1.0)
    if np.linalg.norm(r - r.conj().T) > tol * scale:
        raise ValueError("covariance is not Hermitian")
    if not 0 <= n_sources < r.shape[0]:
        raise ValueError("need 0 <= n_sources < N")
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    order = np.argsort(w)[::-1]
    # PSD input: tiny negative round-off eigenvalues are clipped
    return EigenSystem(np.clip(w[order], 0.0, None), v[:, order], int(n_sources))


def music_polynomial(es: EigenSystem) -> np.ndarray:
    """Root-MUSIC polynomial coefficients, highest degree first.

    Coefficient of ``z^(N-1+k)`` is the sum of the k-th diagonal of
    ``C = E_N E_N^H``, for k = -(N-1)..(N-1).
    """
    en = es.noise_subspace
    c = en @ en.conj().T
    n = c.shape[0]
    return np.array([np.trace(c, offset=k) for k in range(n - 1, -n, -1)])


def polynomial_roots(coeffs) -> np.ndarray:
    """Roots via eigenvalues of the companion matrix (LAPACK geev balances it)."""
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if coeffs.size == 0:
        raise ValueError("zero polynomial")
    stripped = np.trim_zeros(coeffs, "b")
    zeros_at_origin = np.zeros(coeffs.size - stripped.size, dtype=complex)
    deg = stripped.size - 1
    if deg == 0:
        return zeros_at_origin
    comp = np.zeros((deg, deg), dtype=complex)
    comp[0, :] = -stripped[1:] / stripped[0]
    comp[np.arange(1, deg), np.arange(deg - 1)] = 1.0
    return np.concatenate([np.linalg.eigvals(comp), zeros_at_origin])


def root_music(es: EigenSystem, geom: ArrayGeometry, n_sources: int | None = None) -> RootMusicResult:
    """Root-MUSIC angle estimates for the sin-convention array.

    Among the roots strictly inside the unit circle the ``n_sources`` closest
    to it are kept and mapped to ``arcsin(arg(z) / (2 pi d))``.
    """
    m = es.n_sources if n_sources is None else n_sources
    roots = polynomial_roots(music_polynomial(es))
    inside = roots[np.abs(roots) < 1 - INSIDE_TOL]
    if inside.size < m:
        raise EstimationError(f"only {inside.size} roots inside the unit circle, need {m}")
    chosen = inside[np.argsort(1 - np.abs(inside), kind="stable")[:m]]
    s = np.angle(chosen) / (2 * np.pi * geom.spacing_wavelengths)
    clamped = bool(np.any(np.abs(s) > 1))
    if clamped:
        warnings.warn("Root-MUSIC root phase outside the visible region; clamped", RuntimeWarning)
    return RootMusicResult(np.arcsin(np.clip(s, -1, 1)), chosen, clamped)


def noise_variance(es: EigenSystem) -> float:
    """Mean of the N - M smallest eigenvalues."""
    return float(np.mean(es.eigenvalues[es.n_sources :]))


def estimate_snr(es: EigenSystem, sigma2: float, m: int) -> tuple[float, bool]:
    """Per-element SNR of source ``m`` (0-based eigenvalue index).

    Returns ``(gamma, degenerate)``; ``gamma`` is 0 and ``degenerate`` True
    when the eigenvalue does not exceed the noise floor.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if not 0 <= m < max(es.n_sources, 1):
        raise ValueError("eigenvalue index out of range")
    mu = es.eigenvalues[m]
    if mu <= sigma2:
        return 0.0, True
    return float((mu - sigma2) / (es.n_elements * sigma2)), False


def associate_sources(
    angles, es: EigenSystem, geom: ArrayGeometry, true_angles: dict | None = None
) -> list[SourceEstimate]:
    """Pair each angle with a signal eigenvalue and a Bob/Eve label.

    An angle is paired with the signal eigenvector most correlated with its
    steering vector; clashes go to the larger correlation and the loser takes
    the best remaining eigenvector (flagged ``ambiguous``). Labels come from
    the nearest true angle in ``true_angles`` (``{"bob": ..., "eve": ...}``);
    without ground truth the strongest source is taken to be Bob.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    m = angles.size
    if m != es.n_sources:
        raise ValueError(f"expected {es.n_sources} angles, got {m}")
    a = uplink_steering(angles, geom).reshape(geom.n_elements, m)
    corr = np.abs(es.signal_subspace.conj().T @ a) / np.linalg.norm(a, axis=0)  # eig x angle

    pairing = [-1] * m
    flagged = [False] * m
    taken: set[int] = set()
    # greedy on correlation magnitude, strongest claims first
    for idx in np.argsort(-corr, axis=None, kind="stable"):
        i, k = divmod(int(idx), m)
        if pairing[k] >= 0 or i in taken:
            continue
        pairing[k] = i
        taken.add(i)
        flagged[k] = int(np.argmax(corr[:, k])) != i
    sigma2 = noise_variance(es)

    if true_angles is not None:
        names = [Label(k) for k in true_angles]
        truth = np.array([true_angles[k] for k in true_angles], dtype=float)
        cost = np.abs(angles[:, None] - truth[None, :])
        labels: list[Label | None] = [None] * m
        used: set[int] = set()
        for idx in np.argsort(cost, axis=None, kind="stable"):
            k, t = divmod(int(idx), truth.size)
            if labels[k] is None and t not in used:
                labels[k] = names[t]
                used.add(t)
    else:
        labels = [None] * m
        order = sorted(range(m), key=lambda k: pairing[k])
        for rank, k in enumerate(order):
            labels[k] = Label.BOB if rank == 0 else Label.EVE

    out = []
    for k in range(m):
        gamma, degen = estimate_snr(es, sigma2, pairing[k]) if sigma2 > 0 else (0.0, True)
        out.append(
            SourceEstimate(float(angles[k]), gamma, labels[k], pairing[k], degen, flagged[k])
        )
    label_order = {Label.BOB: 0, Label.EVE: 1}
    out.sort(key=lambda s: (label_order.get(s.label, 2), s.angle_est))
    return out


def estimate_sources(
    snap: SnapshotSet, geom: ArrayGeometry, n_sources: int = 2, true_angles: dict | None = None
) -> list[SourceEstimate]:
    """Covariance -> eigendecomposition -> Root-MUSIC -> SNR -> labels."""
    es = eigendecompose(sample_covariance(snap), n_sources)
    rm = root_music(es, geom)
    if true_angles is None:
        scn = snap.scenario
        true_angles = {"bob": scn.theta_b, "eve": scn.theta_e}
    return associate_sources(rm.angles, es, geom, true_angles)
