"""
(eta, M)-non-resonance of a frequency vector on a finite box.

omega is (eta, M)-non-resonant when every nonzero integer vector k with
|k| <= M and Delta(k) <= M satisfies

    |sum_j k_j omega_j| > eta / ((1 + k-)^(3 sigma) (2 + 10 Delta(k))^(2 d |k|)).

Thresholds are computed in log space; equality counts as a violation.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Tuple

import numpy as np

from lattice.geometry import BoxSpec, EmptySupport, KVector, extremal_radii, index_stats, spread_of_sites

logger = logging.getLogger(__name__)


class Violation(NamedTuple):
    k: KVector
    divisor: float
    threshold: float


@dataclass
class NonResReport:
    checked: int
    violations: List[Violation] = field(default_factory=list)
    min_margin: float = math.inf

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "violations": [
                {"k": [[list(site), value] for site, value in v.k], "divisor": v.divisor, "threshold": v.threshold}
                for v in self.violations
            ],
            "min_margin": self.min_margin,
        }


def log_threshold(k_minus: int, spread: int, total: int, eta: float, sigma: float, d: int,
                  sigma_power: float = 3.0) -> float:
    return (math.log(eta) - sigma_power * sigma * math.log1p(k_minus)
            - 2 * d * total * math.log(2 + 10 * spread))


def nonres_threshold(k: KVector, eta: float, sigma: float, d: int) -> float:
    if not k:
        raise EmptySupport("The zero vector has no threshold")
    stats = index_stats(k)
    return math.exp(log_threshold(extremal_radii(k).k_minus, stats.spread, stats.total, eta, sigma, d))


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``"""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


@lru_cache(maxsize=16)
def kvector_table(box: BoxSpec, M: int) -> Tuple[KVector, ...]:
    """All admissible k, ordered by |k|, then Delta(k), then support and entries"""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    sites = box.sites
    supports_by_size = {}
    for size in range(1, min(M, len(sites)) + 1):
        supports_by_size[size] = [s for s in itertools.combinations(sites, size) if spread_of_sites(s) <= M]

    ordered: List[KVector] = []
    for total in range(1, M + 1):
        level = []
        for size in range(1, min(total, len(sites)) + 1):
            for supp in supports_by_size[size]:
                spread = spread_of_sites(supp)
                for magnitudes in _compositions(total, size):
                    for signs in itertools.product((1, -1), repeat=size):
                        k = tuple((site, sign * mag) for site, sign, mag in zip(supp, signs, magnitudes))
                        level.append((spread, k))
        level.sort()
        ordered.extend(k for _, k in level)
    logger.info(f"Enumerated {len(ordered)} k-vectors for box d={box.d} L={box.L}, M={M}")
    return tuple(ordered)


def enumerate_kvectors(box: BoxSpec, M: int) -> Iterator[KVector]:
    yield from kvector_table(box, M)


@lru_cache(maxsize=16)
def kvector_arrays(box: BoxSpec, M: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Dense k matrix and per-k (k-, Delta, |k|) for vectorized divisor checks"""
    table = kvector_table(box, M)
    K = np.zeros((len(table), box.size), dtype=np.int64)
    k_minus = np.zeros(len(table), dtype=np.int64)
    spread = np.zeros_like(k_minus)
    total = np.zeros_like(k_minus)
    for row, k in enumerate(table):
        for site, value in k:
            K[row, box.index[site]] = value
        stats = index_stats(k)
        k_minus[row] = extremal_radii(k).k_minus
        spread[row] = stats.spread
        total[row] = stats.total
    return K, k_minus, spread, total


def log_thresholds(box: BoxSpec, M: int, eta: float, sigma: float, sigma_power: float = 3.0) -> np.ndarray:
    _, k_minus, spread, total = kvector_arrays(box, M)
    return (math.log(eta) - sigma_power * sigma * np.log1p(k_minus)
            - 2 * box.d * total * np.log(2 + 10 * spread))


def check_nonresonance(omega, eta: float, M: int, sigma: float, box: BoxSpec) -> NonResReport:
    """Evaluate every small divisor |<k, omega>| against its threshold"""
    values = np.asarray(getattr(omega, 'omega', omega), dtype=float)
    table = kvector_table(box, M)
    K, _, _, _ = kvector_arrays(box, M)
    log_theta = log_thresholds(box, M, eta, sigma)
    divisors = np.abs(K @ values)
    with np.errstate(divide='ignore'):
        log_margin = np.log(divisors) - log_theta
    bad = np.flatnonzero(log_margin <= 0)
    violations = [Violation(table[i], float(divisors[i]), float(np.exp(log_theta[i]))) for i in bad]
    with np.errstate(over='ignore'):
        min_margin = float(np.exp(log_margin.min())) if len(table) else math.inf
    if violations:
        logger.warning(f"{len(violations)} of {len(table)} k-vectors violate the non-resonance condition")
    return NonResReport(checked=len(table), violations=violations, min_margin=min_margin)


def is_nonresonant_batch(omegas: np.ndarray, K: np.ndarray, log_theta: np.ndarray) -> np.ndarray:
    """Row-wise: True where no k violates, for a (trials x sites) block of frequencies"""
    divisors = np.abs(omegas @ K.T)
    with np.errstate(divide='ignore'):
        resonant = np.log(divisors) <= log_theta[None, :]
    return ~resonant.any(axis=1)
