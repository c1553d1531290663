"""Null-space-projection beamformers: non-robust, fixed-interval robust and adaptive robust.

The robust designs replace the point manifolds in the NSP construction by
their conditional moments under a uniform angle error on
``[-delta_max, delta_max]``::

    R(p, q) = E[h_p h_q^*] = g(a_pq, b_pq, c) / N
    u(n)    = E[h_n]       = g(e_n, f_n, c) / sqrt(N)

with ``c = delta_max / pi`` and

    g(a, b, c) = (1 / 2pi) * integral_{-pi}^{pi} exp(a cos(c x) + b sin(c x)) dx.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .array_model import ArrayGeometry, downlink_manifold

QUAD_TOL = 1e-9
QUAD_START_ORDER = 16
QUAD_MAX_ORDER = 512
DEFAULT_FIXED_DELTA = np.deg2rad(1.0)


class QuadratureError(ArithmeticError):
    pass


class SynthesisError(ValueError):
    """Beamformer direction collapsed to zero (Bob and Eve indistinguishable)."""


class Scheme(str, enum.Enum):
    AR_NSP = "ar_nsp"
    FIXED_ROBUST = "fixed_robust"
    NON_ROBUST = "non_robust"


@dataclass(frozen=True)
class ConditionalMoments:
    R: np.ndarray
    u: np.ndarray
    delta_max: float


@dataclass(frozen=True)
class BeamformerSet:
    v_b: np.ndarray
    w_e: np.ndarray
    scheme: Scheme


@lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _g_fixed(a, b, c, order):
    t, w = _gauss_legendre(order)
    cx = c * np.pi * t
    vals = np.exp(np.multiply.outer(a, np.cos(cx)) + np.multiply.outer(b, np.sin(cx)))
    return vals @ (w / 2)


def g_integral(a, b, c: float, tol: float = QUAD_TOL, max_order: int = QUAD_MAX_ORDER):
    """Evaluate ``g(a, b, c)`` elementwise over broadcast complex ``a`` and ``b``.

    Gauss-Legendre on [-pi, pi], doubling the order from 16 until successive
    estimates agree to ``tol`` in every entry.
    """
    if c < 0:
        raise ValueError("c must be non-negative")
    a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    if c == 0:
        return np.exp(a) if a.ndim else complex(np.exp(a))
    order = QUAD_START_ORDER
    prev = _g_fixed(a, b, c, order)
    while order < max_order:
        order *= 2
        cur = _g_fixed(a, b, c, order)
        if np.max(np.abs(cur - prev), initial=0.0) < tol:
            cur = np.where((a == 0) & (b == 0), 1.0 + 0j, cur)  # exact for a constant unit integrand
            return cur if cur.ndim else complex(cur)
        prev = cur
    raise QuadratureError(f"g-integral did not converge to {tol} by order {max_order}")


@lru_cache(maxsize=4096)
def _moments(theta_hat: float, delta_max: float, n: int, d: float):
    geom = ArrayGeometry(n, d)
    kd = 2 * np.pi * d
    c = delta_max / np.pi
    lags = np.arange(n)  # q - p >= 0; negative lags by conjugation keeps R exactly Hermitian
    g_lag = np.asarray(g_integral(1j * kd * lags * np.cos(theta_hat), 1j * kd * lags * np.sin(theta_hat), c))
    p, q = np.indices((n, n))
    R = np.where(q >= p, g_lag[np.abs(q - p)], np.conj(g_lag[np.abs(q - p)])) / n
    if delta_max == 0:
        u = downlink_manifold(theta_hat, geom)
    else:
        x = 2 * np.pi * geom.centered_positions
        u = g_integral(-1j * x * np.cos(theta_hat), -1j * x * np.sin(theta_hat), c) / np.sqrt(n)
    np.fill_diagonal(R, 1.0 / n)
    R.setflags(write=False)
    u.setflags(write=False)
    return R, u


def conditional_moments(theta_hat: float, delta_max: float, geom: ArrayGeometry) -> ConditionalMoments:
    """``E[h h^H]`` and ``E[h]`` for ``theta = theta_hat - err``, err uniform on +-delta_max.

    Results are cached per (angle, interval, array) and returned read-only.
    """
    if delta_max < 0:
        raise ValueError("delta_max must be non-negative")
    R, u = _moments(float(theta_hat), float(delta_max), geom.n_elements, geom.spacing_wavelengths)
    return ConditionalMoments(R, u, float(delta_max))


def conditional_R(theta_hat: float, delta_max: float, geom: ArrayGeometry) -> np.ndarray:
    return conditional_moments(theta_hat, delta_max, geom).R


def conditional_u(theta_hat: float, delta_max: float, geom: ArrayGeometry) -> np.ndarray:
    return conditional_moments(theta_hat, delta_max, geom).u


def _unit(x: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(x)
    if not norm > 1e-12:
        raise SynthesisError(f"{what} has zero norm; Bob and Eve directions coincide")
    return x / norm


def _synthesize(theta_b, delta_b, theta_e, delta_e, geom, scheme) -> BeamformerSet:
    mb = conditional_moments(theta_b, delta_b, geom)
    me = conditional_moments(theta_e, delta_e, geom)
    v = mb.u - me.R @ mb.u
    w = me.u - mb.R @ me.u
    return BeamformerSet(_unit(v, "v_b"), _unit(w, "w_e"), Scheme(scheme))


def robust_beamformers(est_b, est_e, geom: ArrayGeometry) -> BeamformerSet:
    """AR-NSP beamformers from ``(theta_hat, delta_max)`` pairs for Bob and Eve.

    ``v_b`` is the normalised ``(I - R_e) u_b`` and ``w_e`` the normalised
    ``(I - R_b) u_e``.
    """
    (tb, db), (te, de) = est_b, est_e
    return _synthesize(tb, db, te, de, geom, Scheme.AR_NSP)


def nonrobust_nsp(theta_b: float, theta_e: float, geom: ArrayGeometry) -> BeamformerSet:
    """Plain null-space projection on the estimated angles."""
    if theta_b == theta_e:
        raise SynthesisError("Bob and Eve estimated at the same angle")
    hb = downlink_manifold(theta_b, geom)
    he = downlink_manifold(theta_e, geom)
    v = hb - he * (he.conj() @ hb)
    w = he - hb * (hb.conj() @ he)
    return BeamformerSet(_unit(v, "v_b"), _unit(w, "w_e"), Scheme.NON_ROBUST)


def fixed_robust(
    theta_b: float, theta_e: float, geom: ArrayGeometry, fixed_delta: float = DEFAULT_FIXED_DELTA
) -> BeamformerSet:
    """Robust NSP with the same preset interval for both users, not adapted to SNR."""
    if fixed_delta < 0:
        raise ValueError("fixed_delta must be non-negative")
    return _synthesize(theta_b, fixed_delta, theta_e, fixed_delta, geom, Scheme.FIXED_ROBUST)


def synthesize(scheme, theta_b, theta_e, geom, delta_b=0.0, delta_e=0.0, fixed_delta=DEFAULT_FIXED_DELTA):
    """Dispatch on scheme name; ``delta_*`` are only read by AR-NSP."""
    scheme = Scheme(scheme)
    if scheme is Scheme.AR_NSP:
        return robust_beamformers((theta_b, delta_b), (theta_e, delta_e), geom)
    if scheme is Scheme.FIXED_ROBUST:
        return fixed_robust(theta_b, theta_e, geom, fixed_delta)
    return nonrobust_nsp(theta_b, theta_e, geom)
