"""
Sparse polynomials in the symbols J_j, q_j, q̄_j.

A term is keyed by n = (alpha, beta, gamma), the exponents of J, q and q̄.
J_j stands for the rescaled action deviation eps^-1 (|q_j|^2 - zeta_j); it is
an independent symbol for the algebra and a derived quantity at evaluation
time. The degree |n| = |2 alpha + beta + gamma| counts J twice.
"""
import logging
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Tuple

from config.config import Config
from lattice.geometry import (
    BoxSpec,
    EMPTY_INDEX,
    MultiIndex,
    Site,
    add_indices,
    extremal_radii,
    index_stats,
    subtract_indices,
)

logger = logging.getLogger(__name__)


class MonomialKey(NamedTuple):
    alpha: MultiIndex
    beta: MultiIndex
    gamma: MultiIndex

    @property
    def degree(self) -> int:
        return 2 * sum(e for _, e in self.alpha) + sum(e for _, e in self.beta) + sum(e for _, e in self.gamma)

    @property
    def combined(self) -> MultiIndex:
        return add_indices(self.alpha, self.beta, self.gamma)

    @property
    def spread(self) -> int:
        return index_stats(self.combined).spread

    @property
    def n_plus(self) -> int:
        combined = self.combined
        return extremal_radii(combined).n_plus if combined else 0

    @property
    def alpha_total(self) -> int:
        return sum(e for _, e in self.alpha)

    @property
    def support(self) -> Tuple[Site, ...]:
        return tuple(site for site, _ in self.combined)

    @property
    def is_resonant(self) -> bool:
        """beta == gamma: the term depends on the actions (and J) only"""
        return self.beta == self.gamma

    @property
    def kvector(self) -> MultiIndex:
        """k = beta - gamma, the integer vector of the small divisor"""
        return subtract_indices(self.beta, self.gamma)

    def conjugate(self) -> "MonomialKey":
        return MonomialKey(self.alpha, self.gamma, self.beta)


def monomial_key(alpha=EMPTY_INDEX, beta=EMPTY_INDEX, gamma=EMPTY_INDEX) -> MonomialKey:
    return MonomialKey(add_indices(alpha), add_indices(beta), add_indices(gamma))


class HamPoly:
    """
    Immutable sparse polynomial: MonomialKey -> complex coefficient.

    Coefficients below the prune tolerance are never stored. ``dropped_mass``
    is the sup of |coeff| over terms removed by truncation on the way to this
    polynomial.
    """

    __slots__ = ("_terms", "dropped_mass")

    def __init__(self, terms: Optional[Dict[MonomialKey, complex]] = None, dropped_mass: float = 0.0,
                 tolerance: Optional[float] = None):
        tol = Config.PRUNE_TOLERANCE if tolerance is None else tolerance
        self._terms = {key: complex(value) for key, value in (terms or {}).items() if abs(value) > tol}
        self.dropped_mass = float(dropped_mass)

    @classmethod
    def zero(cls) -> "HamPoly":
        return cls()

    @classmethod
    def monomial(cls, coeff: complex, alpha=EMPTY_INDEX, beta=EMPTY_INDEX, gamma=EMPTY_INDEX) -> "HamPoly":
        return cls({monomial_key(alpha, beta, gamma): coeff})

    # container protocol

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[MonomialKey]:
        return iter(sorted(self._terms))

    def __contains__(self, key) -> bool:
        return key in self._terms

    def __getitem__(self, key: MonomialKey) -> complex:
        return self._terms.get(key, 0j)

    def items(self) -> List[Tuple[MonomialKey, complex]]:
        """Terms in canonical key order"""
        return sorted(self._terms.items())

    def keys(self) -> List[MonomialKey]:
        return sorted(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HamPoly):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self) -> str:
        return f"HamPoly({len(self._terms)} terms, max|c|={self.max_abs():.3e})"

    # arithmetic

    def __add__(self, other: "HamPoly") -> "HamPoly":
        acc = dict(self._terms)
        for key, value in other.items():
            acc[key] = acc.get(key, 0j) + value
        return HamPoly(acc, max(self.dropped_mass, other.dropped_mass))

    def __neg__(self) -> "HamPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "HamPoly") -> "HamPoly":
        return self + (-other)

    def scale(self, factor: complex) -> "HamPoly":
        return HamPoly({key: factor * value for key, value in self._terms.items()},
                       abs(factor) * self.dropped_mass)

    __mul__ = scale
    __rmul__ = scale

    # bookkeeping

    def max_abs(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    def filter(self, predicate: Callable[[MonomialKey], bool]) -> "HamPoly":
        return HamPoly({k: v for k, v in self._terms.items() if predicate(k)}, self.dropped_mass)

    def degrees(self) -> Dict[int, int]:
        """Histogram degree -> number of terms"""
        histogram: Dict[int, int] = {}
        for key in self._terms:
            histogram[key.degree] = histogram.get(key.degree, 0) + 1
        return dict(sorted(histogram.items()))

    def min_degree(self) -> Optional[int]:
        return min((k.degree for k in self._terms), default=None)

    def homogeneous_part(self, degree: int) -> "HamPoly":
        return self.filter(lambda k: k.degree == degree)

    def sites(self) -> List[Site]:
        return sorted({site for key in self._terms for site in key.support})

    def restrict_to_box(self, box: BoxSpec) -> "HamPoly":
        """Drop terms whose support leaves the box, recording their sup in ``dropped_mass``"""
        kept, dropped = {}, self.dropped_mass
        for key, value in self._terms.items():
            if all(box.contains(site) for site in key.support):
                kept[key] = value
            else:
                dropped = max(dropped, abs(value))
        if len(kept) < len(self._terms):
            logger.info(f"Dropped {len(self._terms) - len(kept)} terms leaving the box (sup {dropped:.3e})")
        return HamPoly(kept, dropped)

    def is_conjugate_symmetric(self, tol: float = 1e-14) -> bool:
        """coeff(n) == conj(coeff(n̄)), i.e. the polynomial is real-valued"""
        return all(abs(v - self[k.conjugate()].conjugate()) <= tol * max(1.0, abs(v))
                   for k, v in self._terms.items())


def split_resonant(P: HamPoly) -> Tuple[HamPoly, HamPoly]:
    """Z collects beta == gamma keys, R the rest; Z + R == P"""
    Z = P.filter(lambda k: k.is_resonant)
    R = P.filter(lambda k: not k.is_resonant)
    return Z, R


def truncate(P: HamPoly, max_degree: int, max_spread: Optional[int] = None) -> Tuple[HamPoly, float]:
    """
    Keep the terms with |n| <= max_degree and Delta(n) <= max_spread.

    Returns the kept polynomial and the sup of |coeff| over the dropped terms.
    """
    if max_degree < 2:
        raise ValueError(f"max_degree must be >= 2, got {max_degree}")
    kept, ledger = {}, 0.0
    for key, value in P.items():
        if key.degree <= max_degree and (max_spread is None or key.spread <= max_spread):
            kept[key] = value
        else:
            ledger = max(ledger, abs(value))
    return HamPoly(kept, max(P.dropped_mass, ledger)), ledger
