"""One pass of the adaptive-robust design: estimate, predict, beamform.

Two ways to obtain the angle estimates feeding the beamformers:

* ``full``: uplink snapshots -> Root-MUSIC / SNR estimation -> CRLB interval.
* ``synthetic``: estimates are the true angles plus an error drawn uniformly
  on ``[-interval, interval]``; the adaptive scheme is told the interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import beamformer as bfm
from .array_model import ArrayGeometry, Convention
from .beamformer import Scheme
from .estimator import EstimationError, Label, SourceEstimate, estimate_sources
from .predictor import DEFAULT_DELTA_CAP, DEFAULT_MAX_ANGLE, EndfireError, predict
from .uplink import UplinkScenario, generate_snapshots

ALL_SCHEMES = (Scheme.AR_NSP, Scheme.FIXED_ROBUST, Scheme.NON_ROBUST)

# failures that exclude a trial instead of aborting the experiment
TRIAL_FAILURES = (EstimationError, EndfireError, bfm.SynthesisError)


@dataclass
class DesignResult:
    theta_b_hat: float
    theta_e_hat: float
    delta_b: float
    delta_e: float
    beamformers: dict = field(default_factory=dict)  # Scheme -> BeamformerSet
    sources: list[SourceEstimate] = field(default_factory=list)
    predictions: dict = field(default_factory=dict)  # Label -> ErrorPrediction


def design(
    theta_b_hat: float,
    theta_e_hat: float,
    delta_b: float,
    delta_e: float,
    geom: ArrayGeometry,
    schemes=ALL_SCHEMES,
    fixed_delta: float = bfm.DEFAULT_FIXED_DELTA,
) -> DesignResult:
    dl = geom.with_convention(Convention.DOWNLINK_COS_CENTERED)
    out = DesignResult(theta_b_hat, theta_e_hat, delta_b, delta_e)
    for s in schemes:
        out.beamformers[Scheme(s)] = bfm.synthesize(
            s, theta_b_hat, theta_e_hat, dl, delta_b, delta_e, fixed_delta
        )
    return out


def synthetic_design(theta_b, theta_e, interval, unit_errors, geom, schemes=ALL_SCHEMES, fixed_delta=bfm.DEFAULT_FIXED_DELTA, rho=1.0):
    """Estimates ``theta + interval * unit_errors``; AR-NSP uses ``rho * interval``.

    ``unit_errors`` is a pair of draws on [-1, 1] so that sweeps over the
    interval can share the same underlying randomness.
    """
    eb, ee = interval * np.asarray(unit_errors, dtype=float)
    return design(theta_b + eb, theta_e + ee, rho * interval, rho * interval, geom, schemes, fixed_delta)


def full_design(
    scn: UplinkScenario,
    geom: ArrayGeometry,
    rng: np.random.Generator,
    rhos=(1.0,),
    schemes=ALL_SCHEMES,
    fixed_delta: float = bfm.DEFAULT_FIXED_DELTA,
    delta_cap: float = DEFAULT_DELTA_CAP,
    max_angle: float = DEFAULT_MAX_ANGLE,
) -> list[DesignResult]:
    """Run the whole uplink-estimation chain once and design for each ``rho``.

    Raises one of :data:`TRIAL_FAILURES` when the trial has to be discarded.
    """
    up = geom.with_convention(Convention.UPLINK_SIN)
    snap = generate_snapshots(scn, up, rng=rng)
    sources = estimate_sources(snap, up, 2, {"bob": scn.theta_b, "eve": scn.theta_e})
    by_label = {s.label: s for s in sources}
    if set(by_label) != {Label.BOB, Label.EVE}:
        raise EstimationError("could not label both sources")
    sb, se = by_label[Label.BOB], by_label[Label.EVE]
    results = []
    for rho in rhos:
        pb = predict(sb.angle_est, sb.snr_est, scn.n_snapshots, up, rho, delta_cap, max_angle)
        pe = predict(se.angle_est, se.snr_est, scn.n_snapshots, up, rho, delta_cap, max_angle)
        res = design(sb.angle_est, se.angle_est, pb.delta_max, pe.delta_max, geom, schemes, fixed_delta)
        res.sources = sources
        res.predictions = {Label.BOB: pb, Label.EVE: pe}
        results.append(res)
    return results


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``; identical keys give identical draws."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) % 2**64, *map(int, keys)]))

