"""CRLB-based prediction of the DOA error interval."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import ArrayGeometry

ENDFIRE_COS_MIN = 1e-6
DEFAULT_DELTA_CAP = np.deg2rad(10.0)
DEFAULT_MAX_ANGLE = np.deg2rad(80.0)


class EndfireError(ValueError):
    """The CRLB is singular as the estimated angle approaches endfire."""


@dataclass(frozen=True)
class ErrorPrediction:
    crlb_var: float
    delta_max: float
    rho: float
    capped: bool = False

    def interval(self, theta_hat: float) -> tuple[float, float]:
        return theta_hat - self.delta_max, theta_hat + self.delta_max


def crlb(theta_hat: float, gamma_hat: float, n_snapshots: int, geom: ArrayGeometry) -> float:
    """Approximate DOA error variance bound in rad^2.

    ``lambda^2 / (8 pi^2 N_s gamma cos^2(theta) L)`` with ``L`` the sum of
    squared centred element offsets and lambda = 1.
    """
    if gamma_hat <= 0:
        raise ValueError("gamma_hat must be positive")
    if n_snapshots < 1:
        raise ValueError("n_snapshots must be >= 1")
    c = np.cos(theta_hat)
    if abs(c) < ENDFIRE_COS_MIN:
        raise EndfireError(f"cos(theta_hat) = {c:.3g} too close to endfire")
    return 1.0 / (8 * np.pi**2 * n_snapshots * gamma_hat * c**2 * geom.aperture_moment)


def error_interval(crlb_var: float, rho: float = 1.0, cap: float = DEFAULT_DELTA_CAP) -> ErrorPrediction:
    """Half-width ``rho * sqrt(crlb_var)`` of the predicted error interval.

    Infinite or NaN variances (degenerate SNR estimates) and widths beyond
    ``cap`` are clipped to ``cap``.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    delta = rho * np.sqrt(crlb_var) if np.isfinite(crlb_var) else np.inf
    capped = not delta <= cap
    return ErrorPrediction(float(crlb_var), float(min(delta, cap)) if capped else float(delta), rho, capped)


def predict(
    theta_hat: float,
    gamma_hat: float,
    n_snapshots: int,
    geom: ArrayGeometry,
    rho: float = 1.0,
    cap: float = DEFAULT_DELTA_CAP,
    max_angle: float = DEFAULT_MAX_ANGLE,
) -> ErrorPrediction:
    """CRLB plus interval for one source, with the degenerate-SNR and endfire guards."""
    if abs(theta_hat) > max_angle:
        raise EndfireError(f"|theta_hat| = {np.degrees(abs(theta_hat)):.2f} deg beyond the allowed range")
    if gamma_hat <= 0:
        return ErrorPrediction(np.inf, cap, rho, True)
    return error_interval(crlb(theta_hat, gamma_hat, n_snapshots, geom), rho, cap)
