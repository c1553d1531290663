"""Second-slot link: AN-aided transmission, rates, BER and eye-pattern simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import ArrayGeometry, downlink_manifold, qpsk_demodulate, qpsk_modulate
from .beamformer import BeamformerSet


def dbm_to_watts(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


@dataclass(frozen=True)
class LinkConfig:
    """Downlink parameters; ``beta1_sq + beta2_sq`` must be 1."""

    total_power: float = 1.0
    beta1_sq: float = 0.9
    beta2_sq: float = 0.1
    noise_var: float = 0.1
    theta_b: float = np.deg2rad(45.0)
    theta_e: float = np.deg2rad(-30.0)
    seed: int = 0

    def __post_init__(self):
        if self.total_power <= 0 or self.noise_var < 0:
            raise ValueError("total_power must be positive and noise_var non-negative")
        if min(self.beta1_sq, self.beta2_sq) < 0 or abs(self.beta1_sq + self.beta2_sq - 1) > 1e-9:
            raise ValueError(
                f"beta1_sq + beta2_sq must equal 1, got {self.beta1_sq} + {self.beta2_sq}"
            )

    @classmethod
    def from_snr(cls, snr_db: float, total_power_dbm: float = 30.0, **kw) -> "LinkConfig":
        """Noise variance set so that ``P_s / sigma^2`` equals ``snr_db``."""
        ps = dbm_to_watts(total_power_dbm)
        return cls(total_power=ps, noise_var=ps / 10 ** (snr_db / 10), **kw)

    @property
    def signal_amp(self) -> float:
        return float(np.sqrt(self.beta1_sq * self.total_power))

    @property
    def an_amp(self) -> float:
        return float(np.sqrt(self.beta2_sq * self.total_power))


@dataclass
class ResultRow:
    axis_value: float
    metric: str
    scheme: str
    value: float
    stderr: float
    trials: int
    failures: int = 0
    n_antennas: int = 0


@dataclass
class ExperimentResult:
    """Long-format sweep output: one row per (axis value, array size, scheme, metric)."""

    experiment: str
    axis: str
    seed: int
    rows: list[ResultRow] = field(default_factory=list)
    # explicit per-trial tallies, for runners that emit several rows per trial
    attempted: int = 0
    failed: int = 0

    def where(self, metric=None, scheme=None, n_antennas=None) -> list[ResultRow]:
        return [
            r
            for r in self.rows
            if (metric is None or r.metric == metric)
            and (scheme is None or r.scheme == str(getattr(scheme, "value", scheme)))
            and (n_antennas is None or r.n_antennas == n_antennas)
        ]

    def series(self, metric, scheme=None, n_antennas=None) -> tuple[np.ndarray, np.ndarray]:
        rows = self.where(metric, scheme, n_antennas)
        return np.array([r.axis_value for r in rows]), np.array([r.value for r in rows])

    def failure_counts(self) -> tuple[int, int]:
        """(failed, attempted) trial evaluations."""
        if self.attempted:
            return self.failed, self.attempted
        return sum(r.failures for r in self.rows), sum(r.trials + r.failures for r in self.rows)

    @property
    def failure_rate(self) -> float:
        failed, tot = self.failure_counts()
        return failed / tot if tot else 0.0


def transmit(bf: BeamformerSet, cfg: LinkConfig, symbols, an) -> np.ndarray:
    """``s_m = beta1 sqrt(P_s) v_b x_m + beta2 sqrt(P_s) w_e z_m``.

    Scalar symbol/AN give a length-N vector; length-K arrays give N x K.
    """
    return cfg.signal_amp * np.multiply.outer(bf.v_b, symbols) + cfg.an_amp * np.multiply.outer(bf.w_e, an)


def complex_noise(rng: np.random.Generator, var: float, shape) -> np.ndarray:
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def receive(theta, s_m, geom: ArrayGeometry, noise=0.0) -> np.ndarray:
    """``y(theta) = h(theta)^H s_m + n`` for the supplied noise sample(s)."""
    h = downlink_manifold(theta, geom)
    return h.conj().T @ s_m + noise


def gains(theta, bf: BeamformerSet, geom: ArrayGeometry) -> tuple:
    """Composite signal and AN gains ``h^H v_b`` and ``h^H w_e`` at ``theta``."""
    h = downlink_manifold(theta, geom)
    return h.conj().T @ bf.v_b, h.conj().T @ bf.w_e


def sinr(theta, bf: BeamformerSet, cfg: LinkConfig, geom: ArrayGeometry):
    gs, ga = gains(theta, bf, geom)
    return cfg.beta1_sq * cfg.total_power * np.abs(gs) ** 2 / (
        cfg.noise_var + cfg.beta2_sq * cfg.total_power * np.abs(ga) ** 2
    )


def achievable_rate(theta, bf: BeamformerSet, cfg: LinkConfig, geom: ArrayGeometry):
    """``log2(1 + SINR(theta))`` in bits/s/Hz, AN treated as noise."""
    return np.log2(1 + sinr(theta, bf, cfg, geom))


def secrecy_rate(bf: BeamformerSet, cfg: LinkConfig, geom: ArrayGeometry) -> float:
    """``max(0, R(theta_b) - R(theta_e))`` at the true angles held in ``cfg``."""
    rb = achievable_rate(cfg.theta_b, bf, cfg, geom)
    re = achievable_rate(cfg.theta_e, bf, cfg, geom)
    return float(max(0.0, rb - re))


@dataclass
class SymbolBlock:
    """Random draws shared by every scheme evaluated on one trial."""

    bits: np.ndarray  # K x 2
    symbols: np.ndarray
    an: np.ndarray
    noise: np.ndarray  # unit variance, scaled by the link noise std at use

    @classmethod
    def draw(cls, rng: np.random.Generator, n_symbols: int) -> "SymbolBlock":
        bits = rng.integers(0, 2, size=(n_symbols, 2))
        an = complex_noise(rng, 1.0, n_symbols)
        noise = complex_noise(rng, 1.0, n_symbols)
        return cls(bits, qpsk_modulate(bits), an, noise)


def bit_errors(bf: BeamformerSet, cfg: LinkConfig, geom: ArrayGeometry, block: SymbolBlock) -> int:
    """Bit errors at Bob for one block, detected with the true composite gain as phase reference."""
    gs, ga = gains(cfg.theta_b, bf, geom)
    y = cfg.signal_amp * gs * block.symbols + cfg.an_amp * ga * block.an + np.sqrt(cfg.noise_var) * block.noise
    detected = qpsk_demodulate(y * np.conj(gs))
    return int(np.count_nonzero(detected != block.bits))


def circular_std(phases, axis=-1):
    """Circular standard deviation ``sqrt(-2 ln |mean exp(j phi)|)`` in radians."""
    r = np.abs(np.mean(np.exp(1j * np.asarray(phases)), axis=axis))
    return np.sqrt(-2 * np.log(np.clip(r, 1e-300, 1.0)))


def eye_phases(bf: BeamformerSet, cfg: LinkConfig, geom: ArrayGeometry, angles, block: SymbolBlock, noise=None) -> np.ndarray:
    """Received phase ``arg y(theta)`` for each grid angle (rows) and symbol (columns).

    ``noise`` is unit-variance, shape (angles, symbols); by default the
    block's own noise draw is reused for every angle.
    """
    s = transmit(bf, cfg, block.symbols, block.an)
    h = downlink_manifold(np.asarray(angles, dtype=float), geom)
    noise = block.noise[None, :] if noise is None else noise
    y = h.conj().T @ s + np.sqrt(cfg.noise_var) * noise
    return np.angle(y)


def phase_spread(phases: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """Per-angle circular std of the phase after removing the transmitted symbol's phase."""
    return circular_std(phases - np.angle(symbols)[None, :], axis=-1)
