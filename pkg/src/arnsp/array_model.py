"""Uniform linear array geometry, array manifolds and the QPSK alphabet.

All lengths are in wavelengths (lambda = 1), angles in radians.

Two manifold conventions share one physical angle:

* ``uplink_sin``: ``a(theta)[n] = exp(j 2 pi d n sin(theta))``, first element
  at the phase reference, used for DOA estimation.
* ``downlink_cos_centered``: ``h(theta)[n] = exp(-j 2 pi (n - (N+1)/2) d cos(theta)) / sqrt(N)``,
  phase-centred and unit norm, used for beamforming.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Convention(str, enum.Enum):
    UPLINK_SIN = "uplink_sin"
    DOWNLINK_COS_CENTERED = "downlink_cos_centered"


@dataclass(frozen=True)
class ArrayGeometry:
    """N-element uniform linear array.

    Args:
        n_elements: Number of antennas, at least 2.
        spacing_wavelengths: Element spacing d / lambda, in (0, 0.5].
        convention: Default manifold convention for :func:`manifold`.
    """

    n_elements: int = 16
    spacing_wavelengths: float = 0.5
    convention: Convention = Convention.UPLINK_SIN

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ValueError(f"n_elements must be an integer >= 2, got {self.n_elements}")
        if not 0.0 < self.spacing_wavelengths <= 0.5:
            raise ValueError(
                f"spacing_wavelengths must lie in (0, 0.5], got {self.spacing_wavelengths}"
            )
        object.__setattr__(self, "convention", Convention(self.convention))

    @property
    def centered_positions(self) -> np.ndarray:
        """Element offsets ``(n - (N+1)/2) * d`` for n = 1..N, in wavelengths."""
        n = np.arange(1, self.n_elements + 1)
        return (n - (self.n_elements + 1) / 2.0) * self.spacing_wavelengths

    @property
    def aperture_moment(self) -> float:
        """Sum of squared centred element offsets (wavelengths squared)."""
        return float(np.sum(self.centered_positions**2))

    def with_convention(self, convention) -> "ArrayGeometry":
        return ArrayGeometry(self.n_elements, self.spacing_wavelengths, Convention(convention))


@dataclass(frozen=True)
class ManifoldVector:
    entries: np.ndarray
    convention: Convention
    theta: float

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta)) or np.any(np.abs(theta) > np.pi / 2 + 1e-12):
        raise ValueError(f"angle must lie in [-pi/2, pi/2], got {theta}")
    return theta


def uplink_steering(theta, geom: ArrayGeometry) -> np.ndarray:
    """Uplink steering vector(s) ``a(theta)``.

    A scalar ``theta`` gives a length-N vector; an array of K angles gives an
    N x K matrix.
    """
    theta = _check_angle(theta)
    n = np.arange(geom.n_elements)
    phase = 2 * np.pi * geom.spacing_wavelengths * np.multiply.outer(n, np.sin(theta))
    return np.exp(1j * phase)


def downlink_manifold(theta, geom: ArrayGeometry) -> np.ndarray:
    """Unit-norm downlink manifold(s) ``h(theta)``; shape as in :func:`uplink_steering`."""
    theta = _check_angle(theta)
    psi = -np.multiply.outer(geom.centered_positions, np.cos(theta))
    return np.exp(2j * np.pi * psi) / np.sqrt(geom.n_elements)


def manifold(theta: float, geom: ArrayGeometry) -> ManifoldVector:
    """Tagged manifold vector in the geometry's own convention."""
    if geom.convention is Convention.UPLINK_SIN:
        entries = uplink_steering(theta, geom)
    else:
        entries = downlink_manifold(theta, geom)
    return ManifoldVector(entries, geom.convention, float(theta))


# Gray mapping: first bit selects the sign of the real part, second bit the
# imaginary part (0 -> +, 1 -> -). Adjacent quadrants differ in one bit.
_QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def qpsk_modulate(bits) -> np.ndarray:
    """Map bit pairs to unit-modulus QPSK symbols.

    ``bits`` is a flat sequence of even length (or an (..., 2) array); the
    result has one complex symbol per pair. ``00 -> (1+j)/sqrt(2)``.
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] != 2:
        if bits.ndim != 1 or bits.size % 2:
            raise ValueError("bits must come in pairs")
        bits = bits.reshape(-1, 2)
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    return _QPSK_POINTS[2 * bits[..., 0] + bits[..., 1]]


def qpsk_demodulate(y) -> np.ndarray:
    """Nearest-quadrant decision; returns an (..., 2) array of bits.

    The caller is responsible for applying the receiver's phase reference
    before the decision.
    """
    y = np.asarray(y)
    return np.stack([(y.real < 0), (y.imag < 0)], axis=-1).astype(np.int8)
