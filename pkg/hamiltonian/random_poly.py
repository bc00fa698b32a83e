"""
Seeded random polynomials for the bracket oracles and self-tests.
"""
import logging
from typing import Tuple

import numpy as np

from hamiltonian.polynomial import HamPoly, MonomialKey
from lattice.geometry import BoxSpec, StateVector, canonical

logger = logging.getLogger(__name__)


def random_key(rng: np.random.Generator, box: BoxSpec, degree: int, with_J: bool = True,
               max_sites: int = 2) -> MonomialKey:
    """A monomial of exactly ``degree`` on at most ``max_sites`` neighbouring-ish sites"""
    n_sites = int(rng.integers(1, max_sites + 1))
    anchor = box.sites[int(rng.integers(box.size))]
    pool = [anchor] + box.neighbours(anchor)
    chosen = [pool[i] for i in rng.choice(len(pool), size=min(n_sites, len(pool)), replace=False)]

    alpha, beta, gamma = {}, {}, {}
    remaining = degree
    if with_J and remaining >= 2:
        j_degree = int(rng.integers(0, remaining // 2 + 1))
        for _ in range(j_degree):
            site = chosen[int(rng.integers(len(chosen)))]
            alpha[site] = alpha.get(site, 0) + 1
        remaining -= 2 * j_degree
    for _ in range(remaining):
        site = chosen[int(rng.integers(len(chosen)))]
        target = beta if rng.random() < 0.5 else gamma
        target[site] = target.get(site, 0) + 1
    return MonomialKey(canonical(alpha), canonical(beta), canonical(gamma))


def random_poly(rng: np.random.Generator, box: BoxSpec, max_degree: int = 8, n_terms: int = 6,
                real: bool = True, with_J: bool = True, min_degree: int = 2) -> HamPoly:
    """Sum of random monomials; ``real`` adds each term's conjugate so the polynomial is real-valued"""
    terms = {}
    for _ in range(n_terms):
        degree = int(rng.integers(min_degree, max_degree + 1))
        key = random_key(rng, box, degree, with_J)
        coeff = complex(rng.normal(), rng.normal())
        terms[key] = terms.get(key, 0j) + coeff
        if real:
            conj = key.conjugate()
            terms[conj] = terms.get(conj, 0j) + coeff.conjugate()
    return HamPoly(terms)


def random_homogeneous_pair(rng: np.random.Generator, box: BoxSpec, degrees: Tuple[int, int] = (4, 4),
                            with_J: bool = True) -> Tuple[HamPoly, HamPoly]:
    """Two unit-coefficient monomials of the given degrees sharing at least one site"""
    while True:
        mu = random_key(rng, box, degrees[0], with_J)
        m = random_key(rng, box, degrees[1], with_J)
        if set(mu.support) & set(m.support):
            return HamPoly({mu: 1.0}), HamPoly({m: 1.0})


def random_state(rng: np.random.Generator, box: BoxSpec, scale: float = 1.0) -> StateVector:
    return StateVector(box, scale * (rng.normal(size=box.size) + 1j * rng.normal(size=box.size)))


def random_zeta(rng: np.random.Generator, box: BoxSpec, scale: float = 0.5) -> np.ndarray:
    return scale * rng.random(box.size)
