"""
Homological equation {D, F} = -R for D = sum_j omega_j |q_j|^2.

Since {D, J^alpha q^beta q̄^gamma} = -i <beta - gamma, omega> J^alpha q^beta q̄^gamma,
each nonresonant coefficient is divided by its small divisor:

    F(n) = R(n) / (i <beta - gamma, omega>)
"""
import logging
import math

from config.errors import PropertyViolation
from hamiltonian.bracket import poisson_bracket
from hamiltonian.polynomial import HamPoly, MonomialKey
from lattice.geometry import extremal_radii, index_stats
from media.nonresonance import log_threshold
from media.sampling import FrequencyMap

logger = logging.getLogger(__name__)


class ResonantTerm(PropertyViolation):
    pass


class SmallDivisorViolation(PropertyViolation):
    pass


def small_divisor(key: MonomialKey, omega: FrequencyMap) -> float:
    """<beta - gamma, omega>"""
    return float(sum(value * omega.omega[omega.box.index[site]] for site, value in key.kvector))


def solve_homological(R_s: HamPoly, omega: FrequencyMap, eta: float, M: int, sigma: float) -> HamPoly:
    d = omega.box.d
    generator = {}
    for key, value in R_s.items():
        k = key.kvector
        if not k:
            raise ResonantTerm(f"Term {key} has beta == gamma and belongs to the normal form")
        stats = index_stats(k)
        if stats.total > M or stats.spread > M:
            raise SmallDivisorViolation(f"k = {k} lies outside the checked range |k|, Delta(k) <= {M}")
        divisor = small_divisor(key, omega)
        log_theta = log_threshold(extremal_radii(k).k_minus, stats.spread, stats.total, eta, sigma, d)
        if divisor == 0 or math.log(abs(divisor)) <= log_theta:
            raise SmallDivisorViolation(
                f"|<k, omega>| = {abs(divisor):.3e} for k = {k} is below the threshold {math.exp(log_theta):.3e}")
        generator[key] = value / (1j * divisor)
    F = HamPoly(generator)
    logger.debug(f"Homological equation: {len(F)} generator terms, max|F| = {F.max_abs():.3e}")
    return F


def homological_residual(D: HamPoly, F: HamPoly, R_s: HamPoly, eps: float) -> float:
    """max |coeff| of {D, F} + R_s"""
    residual = poisson_bracket(D, F, eps) + R_s
    return residual.max_abs()
