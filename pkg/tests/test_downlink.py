import numpy as np
import pytest

from arnsp.array_model import ArrayGeometry, downlink_manifold, qpsk_modulate
from arnsp.beamformer import fixed_robust, nonrobust_nsp, robust_beamformers
from arnsp.downlink import (
    LinkConfig,
    SymbolBlock,
    achievable_rate,
    bit_errors,
    circular_std,
    complex_noise,
    eye_phases,
    phase_spread,
    receive,
    secrecy_rate,
    transmit,
)

from .conftest import THETA_B, THETA_E


@pytest.fixture
def link():
    return LinkConfig.from_snr(10.0, 30.0, theta_b=THETA_B, theta_e=THETA_E)


@pytest.fixture
def exact(dl16):
    return robust_beamformers((THETA_B, 0.0), (THETA_E, 0.0), dl16)


def test_link_config_validation():
    with pytest.raises(ValueError, match="beta1_sq"):
        LinkConfig(beta1_sq=0.5, beta2_sq=0.6)
    cfg = LinkConfig.from_snr(10.0, 30.0)
    assert cfg.total_power == pytest.approx(1.0)
    assert cfg.noise_var == pytest.approx(0.1)


def test_transmit_without_an(exact):
    cfg = LinkConfig(beta1_sq=1.0, beta2_sq=0.0, total_power=2.0)
    x = complex(qpsk_modulate([1, 0]))
    s = transmit(exact, cfg, x, 0.7 - 0.2j)
    np.testing.assert_allclose(s, np.sqrt(2.0) * exact.v_b * x)
    assert np.linalg.norm(s) == pytest.approx(np.sqrt(2.0))


def test_transmit_power_conservation(exact, link):
    rng = np.random.default_rng(0)
    blk = SymbolBlock.draw(rng, 100_000)
    s = transmit(exact, link, blk.symbols, blk.an)
    power = np.mean(np.sum(np.abs(s) ** 2, axis=0))
    # the AN term is exponential with mean beta2^2 P_s: std of the mean ~ 0.1 / sqrt(1e5)
    assert power == pytest.approx(link.total_power, abs=5 * 0.1 / np.sqrt(1e5) + 1e-3)


def test_transmit_deterministic(exact, link):
    a = transmit(exact, link, np.array([1j]), np.array([0.3]))
    b = transmit(exact, link, np.array([1j]), np.array([0.3]))
    assert a.tobytes() == b.tobytes()


def test_receive_nulls_an_at_bob(exact, dl16):
    cfg = LinkConfig(noise_var=0.0, theta_b=THETA_B, theta_e=THETA_E)
    x = complex(qpsk_modulate([0, 1]))
    s = transmit(exact, cfg, x, 1.3 + 0.4j)
    y = receive(THETA_B, s, dl16)
    expected = cfg.signal_amp * np.vdot(downlink_manifold(THETA_B, dl16), exact.v_b) * x
    assert y == pytest.approx(expected, abs=1e-14)


def test_receive_linear_and_noise_only(exact, dl16, link):
    s1 = transmit(exact, link, np.array([1.0]), np.array([0.5j]))[:, 0]
    s2 = transmit(exact, link, np.array([-1j]), np.array([0.2]))[:, 0]
    assert receive(0.3, 2 * s1 - s2, dl16) == pytest.approx(2 * receive(0.3, s1, dl16) - receive(0.3, s2, dl16))
    assert receive(0.3, np.zeros(16), dl16, noise=0.25 - 1j) == 0.25 - 1j


def test_rate_at_eve_zero_with_exact_nulling(exact, dl16, link):
    assert achievable_rate(THETA_E, exact, link, dl16) == pytest.approx(0.0, abs=1e-20)


def test_rate_zero_without_signal_power(exact, dl16):
    cfg = LinkConfig(beta1_sq=0.0, beta2_sq=1.0)
    for theta in np.linspace(-1.5, 1.5, 11):
        assert achievable_rate(theta, exact, cfg, dl16) == 0.0


def test_rates_with_orthogonal_manifolds():
    g = ArrayGeometry(8)
    tb, te = np.pi / 2, np.arccos(0.25)
    bf = nonrobust_nsp(tb, te, g)
    cfg = LinkConfig(total_power=1.0, noise_var=0.1, theta_b=tb, theta_e=te)
    expected = np.log2(1 + 0.9 / 0.1)
    assert achievable_rate(tb, bf, cfg, g) == pytest.approx(expected, abs=1e-12)
    assert secrecy_rate(bf, cfg, g) == pytest.approx(expected, abs=1e-12)


def test_secrecy_rate_clamped(dl16, link):
    # beamformers aimed the wrong way round: Eve gets the signal, Bob the null
    swapped = robust_beamformers((THETA_E, 0.0), (THETA_B, 0.0), dl16)
    assert achievable_rate(THETA_E, swapped, link, dl16) > achievable_rate(THETA_B, swapped, link, dl16)
    assert secrecy_rate(swapped, link, dl16) == 0.0


def test_secrecy_rate_falls_with_error_interval(dl16, link):
    rng = np.random.default_rng(4)
    unit = rng.uniform(-1, 1, (200, 2))
    means = []
    for interval in np.deg2rad([1, 4, 8]):
        vals = []
        for ub, ue in unit:
            bf = robust_beamformers((THETA_B + interval * ub, interval), (THETA_E + interval * ue, interval), dl16)
            vals.append(secrecy_rate(bf, link, dl16))
        means.append(np.mean(vals))
    assert means[0] > means[1] > means[2]


def test_noiseless_exact_ber_zero(exact, dl16):
    cfg = LinkConfig(noise_var=0.0, theta_b=THETA_B, theta_e=THETA_E)
    blk = SymbolBlock.draw(np.random.default_rng(1), 5000)
    assert bit_errors(exact, cfg, dl16, blk) == 0


def test_ber_invariant_to_an_at_zero_error(exact, dl16, link):
    blk = SymbolBlock.draw(np.random.default_rng(2), 20_000)
    other = SymbolBlock(blk.bits, blk.symbols, 10 * complex_noise(np.random.default_rng(3), 1.0, 20_000), blk.noise)
    assert bit_errors(exact, link, dl16, blk) == bit_errors(exact, link, dl16, other)


def test_circular_std_basics():
    assert circular_std(np.full(10, 0.7)) == pytest.approx(0.0, abs=1e-7)
    rng = np.random.default_rng(0)
    small = rng.normal(0, 0.05, 100_000)
    assert circular_std(small) == pytest.approx(0.05, rel=0.02)


def test_eye_at_bob_is_noise_limited(exact, dl16, link):
    rng = np.random.default_rng(6)
    blk = SymbolBlock.draw(rng, 1000)
    with_an = eye_phases(exact, link, dl16, [THETA_B], blk)
    no_an = eye_phases(exact, link, dl16, [THETA_B], SymbolBlock(blk.bits, blk.symbols, 0 * blk.an, blk.noise))
    assert np.max(np.abs(with_an - no_an)) < 1e-9
    noiseless = LinkConfig(noise_var=0.0, theta_b=THETA_B, theta_e=THETA_E)
    assert phase_spread(eye_phases(exact, noiseless, dl16, [THETA_B], blk), blk.symbols)[0] < 1e-7


def test_eye_four_clusters_at_bob(exact, dl16):
    cfg = LinkConfig(noise_var=0.0, theta_b=THETA_B, theta_e=THETA_E)
    blk = SymbolBlock.draw(np.random.default_rng(7), 400)
    ph = eye_phases(exact, cfg, dl16, [THETA_B], blk)[0]
    gain = np.angle(np.vdot(downlink_manifold(THETA_B, dl16), exact.v_b))
    rel = np.degrees(np.angle(np.exp(1j * (ph - gain))))
    clusters = np.unique(np.round(rel).astype(int))
    assert set(clusters) == {45, 135, -45, -135}


def test_eye_spread_grows_off_target(dl16, link):
    bf = fixed_robust(THETA_B, THETA_E, dl16)
    blk = SymbolBlock.draw(np.random.default_rng(8), 2000)
    sp = phase_spread(eye_phases(bf, link, dl16, [THETA_B, THETA_E], blk), blk.symbols)
    assert sp[1] > 5 * sp[0]
