"""
The oscillator-lattice Hamiltonian

    H = sum_j v_j |q_j|^2 + 1/2 sum_j |q_j|^4 + R(q, q̄)

with R a short-range degree-6 perturbation, and its rescaled form
H_hat(q) = eps^-4 H(eps q), which up to a constant reads

    H_hat = sum_j omega_j |q_j|^2 + (eps^2/2) sum_j J_j^2 + eps^2 R,
    omega_j = eps^-2 v_j + zeta_j,   eps J_j = |q_j|^2 - zeta_j.
"""
import itertools
import logging
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from config.errors import PropertyViolation
from hamiltonian.polynomial import HamPoly, MonomialKey, monomial_key
from lattice.geometry import BoxSpec, Site, StateVector, l1_distance, unit_index
from media.sampling import InnerParams, Media, frequencies

logger = logging.getLogger(__name__)

PERTURBATION_DEGREE = 6
COEFF_TOLERANCE = 1e-12


class InvalidPerturbation(PropertyViolation):
    pass


def action_polynomial(site: Site) -> HamPoly:
    """I_j = |q_j|^2"""
    return HamPoly.monomial(1.0, beta=unit_index(site), gamma=unit_index(site))


def quadratic_part(omega: Union[np.ndarray, Iterable[float]], box: BoxSpec) -> HamPoly:
    """D = sum_j omega_j |q_j|^2"""
    values = np.asarray(getattr(omega, 'omega', omega), dtype=float)
    return HamPoly({monomial_key(beta=unit_index(j), gamma=unit_index(j)): values[i]
                    for i, j in enumerate(box.sites)})


def action_square_part(box: BoxSpec, eps: float) -> HamPoly:
    """(eps^2/2) sum_j J_j^2"""
    return HamPoly({monomial_key(alpha=unit_index(j, 2)): eps ** 2 / 2 for j in box.sites})


def validate_perturbation(R: HamPoly, box: BoxSpec) -> None:
    problems: List[str] = []
    for key, value in R.items():
        if key.alpha:
            problems.append(f"{key}: J-exponent in the perturbation")
        elif key.degree != PERTURBATION_DEGREE:
            problems.append(f"{key}: degree {key.degree}")
        elif key.spread > 1:
            problems.append(f"{key}: spread {key.spread}")
        elif abs(value) > 1 + COEFF_TOLERANCE:
            problems.append(f"{key}: |coeff| = {abs(value):.3g} > 1")
        elif not all(box.contains(site) for site in key.support):
            problems.append(f"{key}: leaves the box")
    if problems:
        logger.error(f"Invalid perturbation, {len(problems)} bad terms; first: {problems[0]}")
        raise InvalidPerturbation(f"{len(problems)} perturbation terms violate the model: {problems[0]}")


def build_model_hamiltonian(box: BoxSpec, eps: float, R_coeffs: HamPoly, zeta: InnerParams,
                            media: Media) -> HamPoly:
    """D + (eps^2/2) sum J_j^2 + eps^2 R in rescaled variables"""
    if not 0 < eps < 1:
        raise InvalidPerturbation(f"eps must lie in (0, 1), got {eps}")
    validate_perturbation(R_coeffs, box)
    omega = frequencies(media, zeta, eps)
    H = quadratic_part(omega.omega, box) + action_square_part(box, eps) + R_coeffs.scale(eps ** 2)
    logger.info(f"Model Hamiltonian on {box.size} sites: {len(H)} terms, degrees {H.degrees()}")
    return H


def _site_splits(total: int, sites: int) -> Iterable[Tuple[int, ...]]:
    """Nonnegative integer tuples of length ``sites`` summing to ``total``"""
    for cuts in itertools.combinations(range(total + sites - 1), sites - 1):
        bounds = (-1,) + cuts + (total + sites - 1,)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(sites))


def short_range_family(box: BoxSpec, coeff: complex = 1.0) -> HamPoly:
    """Every q^beta q̄^gamma with |beta+gamma| = 6 and Delta(beta+gamma) <= 1 inside the box"""
    terms: Dict[MonomialKey, complex] = {}
    supports = [(j,) for j in box.sites]
    supports += [(a, b) for a, b in itertools.combinations(box.sites, 2) if l1_distance(a, b) == 1]
    for supp in supports:
        for exps in _site_splits(PERTURBATION_DEGREE, 2 * len(supp)):
            if any(exps[2 * s] + exps[2 * s + 1] == 0 for s in range(len(supp))):
                continue
            beta = tuple((site, exps[2 * s]) for s, site in enumerate(supp) if exps[2 * s])
            gamma = tuple((site, exps[2 * s + 1]) for s, site in enumerate(supp) if exps[2 * s + 1])
            terms[MonomialKey((), beta, gamma)] = coeff
    logger.debug(f"Short-range family on {box.size} sites: {len(terms)} monomials")
    return HamPoly(terms)


def original_hamiltonian(box: BoxSpec, media: Media, R: HamPoly, validate: bool = True) -> HamPoly:
    """sum v_j |q_j|^2 + 1/2 sum |q_j|^4 + R in the original amplitudes"""
    if validate:
        validate_perturbation(R, box)
    quartic = HamPoly({monomial_key(beta=unit_index(j, 2), gamma=unit_index(j, 2)): 0.5 for j in box.sites})
    return quadratic_part(media.v, box) + quartic + R


def rescale_state(q: StateVector, eps: float) -> StateVector:
    """q -> q / eps, from original to rescaled amplitudes"""
    return StateVector(q.box, q.amplitudes / eps)


def unscale_state(q: StateVector, eps: float) -> StateVector:
    return StateVector(q.box, q.amplitudes * eps)
