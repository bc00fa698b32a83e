"""
Random potentials v, inner parameters zeta and the frequencies
omega_j = eps^-2 v_j + zeta_j.

Every random number comes from a Philox counter-based generator whose key is
derived through a SeedSequence from (seed, stream tag, trial, site), so any
single value can be regenerated without replaying the others.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from lattice.geometry import BoxSpec, Site, log_site_weights

logger = logging.getLogger(__name__)

MEDIA_STREAM = 0
INNER_STREAM = 1
STATE_STREAM = 2


def site_generator(seed: int, stream: int, trial: int, site: Site, box: BoxSpec) -> np.random.Generator:
    """Independent generator for one (seed, stream, trial, site) cell"""
    entropy = [int(seed), stream, int(trial)] + [c + box.L for c in site]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def site_uniforms(seed: int, stream: int, trial: int, box: BoxSpec) -> np.ndarray:
    return np.array([site_generator(seed, stream, trial, site, box).random() for site in box.sites])


@dataclass
class Media:
    box: BoxSpec
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != (self.box.size,):
            raise ValueError(f"Media has shape {self.v.shape}, box needs ({self.box.size},)")
        if np.any(self.v < 0) or np.any(self.v > 1):
            raise ValueError("Media values must lie in [0, 1]")


@dataclass
class InnerParams:
    box: BoxSpec
    zeta: np.ndarray = field(repr=False)
    sigma: float = 1.0

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        if self.zeta.shape != (self.box.size,):
            raise ValueError(f"zeta has shape {self.zeta.shape}, box needs ({self.box.size},)")

    def normalized(self) -> np.ndarray:
        """zeta_j (1+|j|_1)^(2 sigma), which must lie in [0, 1]"""
        return self.zeta * np.exp(2 * self.sigma * log_site_weights(self.box, "plain"))

    def is_admissible(self, tol: float = 1e-12) -> bool:
        u = self.normalized()
        return bool(np.all(u >= -tol) and np.all(u <= 1 + tol))


@dataclass
class FrequencyMap:
    box: BoxSpec
    omega: np.ndarray = field(repr=False)
    eps: float = 1.0

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)


def sample_media(seed: int, box: BoxSpec) -> Media:
    """v_j uniform on [0, 1], one stream per site"""
    return Media(box, site_uniforms(seed, MEDIA_STREAM, 0, box))


def zero_media(box: BoxSpec) -> Media:
    return Media(box, np.zeros(box.size))


def _primes(count: int):
    primes, candidate = [], 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def distinct_media(box: BoxSpec) -> Media:
    """
    v_j = frac(sqrt(p_j)) for the j-th prime: 1 and the square roots of distinct
    primes are rationally independent, so no integer combination sum k_j v_j vanishes.
    """
    roots = np.sqrt(np.array(_primes(box.size), dtype=float))
    return Media(box, roots - np.floor(roots))


def sample_inner(seed: int, box: BoxSpec, sigma: float, trial: int = 0) -> InnerParams:
    """zeta_j = u_j (1+|j|_1)^(-2 sigma) with u_j uniform on [0, 1]"""
    if sigma < box.d + 1:
        logger.debug(f"sigma={sigma} is below d+1={box.d + 1}")
    u = site_uniforms(seed, INNER_STREAM, trial, box)
    zeta = u * np.exp(-2 * sigma * log_site_weights(box, "plain"))
    return InnerParams(box, zeta, sigma)


def frequencies(media: Media, zeta: InnerParams, eps: float) -> FrequencyMap:
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return FrequencyMap(media.box, media.v / eps ** 2 + zeta.zeta, eps)
