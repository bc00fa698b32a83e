"""
Monte-Carlo estimate of the measure of resonant inner parameters.

The media v is fixed and zeta is drawn from the normalized product measure;
a trial is resonant when any admissible k violates the non-resonance bound.
Trials are split into batches that may run on threads; results are merged
in batch order so the estimate does not depend on the thread count.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import joblib
import numpy as np
from tqdm import tqdm

from config.config import Config
from lattice.geometry import BoxSpec, KVector, index_stats, extremal_radii, log_site_weights
from media.nonresonance import is_nonresonant_batch, kvector_arrays, log_threshold, log_thresholds
from media.sampling import INNER_STREAM, Media, site_uniforms

logger = logging.getLogger(__name__)


@dataclass
class MeasureResult:
    fraction_resonant: float
    stderr: float
    trials: int
    seed: int

    def to_dict(self) -> Dict:
        return asdict(self)


def binomial_stderr(fraction: float, trials: int) -> float:
    return math.sqrt(fraction * (1 - fraction) / trials)


def zeta_block(seed: int, box: BoxSpec, sigma: float, first_trial: int, count: int) -> np.ndarray:
    """(count x sites) inner parameters for trials first_trial .. first_trial+count-1"""
    envelope = np.exp(-2 * sigma * log_site_weights(box, "plain"))
    u = np.stack([site_uniforms(seed, INNER_STREAM, t, box) for t in range(first_trial, first_trial + count)])
    return u * envelope[None, :]


def _batches(trials: int, size: int) -> List[range]:
    return [range(start, min(start + size, trials)) for start in range(0, trials, size)]


def _resonant_in_batch(batch: range, seed: int, box: BoxSpec, sigma: float, base: np.ndarray,
                       K: np.ndarray, log_theta: np.ndarray) -> int:
    omegas = base[None, :] + zeta_block(seed, box, sigma, batch.start, len(batch))
    return int(np.count_nonzero(~is_nonresonant_batch(omegas, K, log_theta)))


def measure_mc(eta: float, M: int, box: BoxSpec, sigma: float, eps: float, media: Media,
               trials: int, seed: int, threads: int = 1, batch_size: Optional[int] = None) -> MeasureResult:
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    K, _, _, _ = kvector_arrays(box, M)
    log_theta = log_thresholds(box, M, eta, sigma)
    base = media.v / eps ** 2
    batches = _batches(trials, batch_size or Config.MC_BATCH_SIZE)
    logger.info(f"Monte-Carlo over {trials} trials, {len(K)} k-vectors, {len(batches)} batches")

    jobs = (joblib.delayed(_resonant_in_batch)(b, seed, box, sigma, base, K, log_theta) for b in batches)
    counts = joblib.Parallel(n_jobs=threads, prefer="threads")(
        tqdm(jobs, total=len(batches), desc="Monte-Carlo", disable=None, leave=False)
    )
    fraction = sum(counts) / trials
    stderr = binomial_stderr(fraction, trials)
    logger.info(f"Resonant fraction {fraction:.4f} +/- {stderr:.4f} (eta={eta})")
    return MeasureResult(fraction, stderr, trials, seed)


def per_k_measure_mc(k: KVector, eta: float, box: BoxSpec, sigma: float, eps: float, media: Media,
                     trials: int, seed: int) -> Dict[str, float]:
    """
    Fraction of zeta whose single divisor |<k, omega>| falls below the
    non-resonance threshold of k, next to the per-k measure estimate
    2 eta / ((1+k-)^sigma (2+10 Delta(k))^(2d|k|)).

    The factor 2 is the length of the excluded interval around the resonance;
    zeta at the innermost site of k has density (1+k-)^(2 sigma).
    """
    stats = index_stats(k)
    k_minus = extremal_radii(k).k_minus
    log_theta = log_threshold(k_minus, stats.spread, stats.total, eta, sigma, box.d)
    log_bound = math.log(2.0) + log_threshold(k_minus, stats.spread, stats.total, eta, sigma, box.d,
                                              sigma_power=1.0)
    k_row = np.zeros(box.size)
    for site, value in k:
        k_row[box.index[site]] = value
    zetas = zeta_block(seed, box, sigma, 0, trials)
    divisors = np.abs((media.v / eps ** 2 + zetas) @ k_row)
    with np.errstate(divide='ignore'):
        hits = np.count_nonzero(np.log(divisors) <= log_theta)
    fraction = hits / trials
    return {"fraction": fraction, "stderr": binomial_stderr(fraction, trials), "bound": math.exp(log_bound)}
