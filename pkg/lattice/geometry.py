"""
Lattice sites on a finite box of Z^d, sparse multi-indices over those sites,
their combinatorial statistics and weighted sup-norms of lattice states.

A multi-index (and a signed KVector) is stored as a tuple of (site, exponent)
pairs sorted lexicographically by site with no zero entries, so that equal
indices are equal tuples and can key dictionaries directly.
"""
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, NamedTuple, Tuple, Union

import numpy as np

from config.errors import PropertyViolation

Site = Tuple[int, ...]
MultiIndex = Tuple[Tuple[Site, int], ...]
KVector = MultiIndex

EMPTY_INDEX: MultiIndex = ()


class EmptySupport(PropertyViolation):
    pass


class IndexStats(NamedTuple):
    supp: Tuple[Site, ...]
    spread: int
    total: int


class Radii(NamedTuple):
    k_minus: int
    n_plus: int


@dataclass(frozen=True)
class BoxSpec:
    """Sites j of Z^d with |j|_inf <= L"""
    d: int
    L: int

    def __post_init__(self):
        if self.d < 1 or self.L < 0:
            raise ValueError(f"Invalid box d={self.d}, L={self.L}")

    @cached_property
    def sites(self) -> List[Site]:
        return list(itertools.product(range(-self.L, self.L + 1), repeat=self.d))

    @cached_property
    def index(self) -> Dict[Site, int]:
        return {site: i for i, site in enumerate(self.sites)}

    @cached_property
    def radii(self) -> np.ndarray:
        """|j|_1 for every site, aligned with ``sites``"""
        return np.array([l1_norm(site) for site in self.sites], dtype=float)

    @property
    def size(self) -> int:
        return (2 * self.L + 1) ** self.d

    @property
    def origin(self) -> Site:
        return (0,) * self.d

    def contains(self, site: Site) -> bool:
        return len(site) == self.d and all(abs(c) <= self.L for c in site)

    def on_boundary(self, site: Site) -> bool:
        return any(abs(c) == self.L for c in site)

    def neighbours(self, site: Site) -> List[Site]:
        """Sites at l1 distance one that lie inside the box"""
        result = []
        for axis in range(self.d):
            for step in (-1, 1):
                other = list(site)
                other[axis] += step
                other = tuple(other)
                if self.contains(other):
                    result.append(other)
        return sorted(result)


@dataclass
class StateVector:
    """Complex amplitudes q_j aligned with ``box.sites``"""
    box: BoxSpec
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.box.size,):
            raise ValueError(f"State has shape {self.amplitudes.shape}, box needs ({self.box.size},)")

    @classmethod
    def zeros(cls, box: BoxSpec) -> "StateVector":
        return cls(box, np.zeros(box.size, dtype=complex))

    @classmethod
    def from_sites(cls, box: BoxSpec, values: Mapping[Site, complex]) -> "StateVector":
        state = cls.zeros(box)
        for site, value in values.items():
            state.amplitudes[box.index[site]] = value
        return state

    def __getitem__(self, site: Site) -> complex:
        return self.amplitudes[self.box.index[site]]

    def actions(self) -> np.ndarray:
        """I_j = |q_j|^2"""
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.box, self.amplitudes.copy())


def l1_norm(j: Site) -> int:
    return sum(abs(c) for c in j)


def l1_distance(a: Site, b: Site) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


def bracket_radius(j: Site) -> int:
    """<j> = max(|j|_1, 1)"""
    return max(l1_norm(j), 1)


def canonical(entries: Union[Mapping[Site, int], Iterable[Tuple[Site, int]]]) -> MultiIndex:
    """Canonical sparse form: merged, zero-free, sorted by site"""
    items = entries.items() if isinstance(entries, Mapping) else entries
    merged: Dict[Site, int] = {}
    for site, value in items:
        site = tuple(site)
        merged[site] = merged.get(site, 0) + int(value)
    return tuple((site, merged[site]) for site in sorted(merged) if merged[site] != 0)


def add_indices(*indices: MultiIndex) -> MultiIndex:
    return canonical(itertools.chain.from_iterable(indices))


def subtract_indices(a: MultiIndex, b: MultiIndex) -> KVector:
    return canonical(itertools.chain(a, ((site, -e) for site, e in b)))


def unit_index(site: Site, exponent: int = 1) -> MultiIndex:
    return canonical([(site, exponent)])


def support(a: MultiIndex) -> Tuple[Site, ...]:
    return tuple(site for site, _ in a)


def spread_of_sites(sites: Iterable[Site]) -> int:
    sites = list(sites)
    if len(sites) < 2:
        return 0
    return max(l1_distance(a, b) for a, b in itertools.combinations(sites, 2))


def index_stats(a: MultiIndex) -> IndexStats:
    supp = support(a)
    return IndexStats(supp=supp, spread=spread_of_sites(supp), total=sum(abs(e) for _, e in a))


def extremal_radii(a: MultiIndex) -> Radii:
    if not a:
        raise EmptySupport("Radii of the zero index are undefined")
    radii = [l1_norm(site) for site, _ in a]
    return Radii(k_minus=min(radii), n_plus=max(radii))


def log_site_weights(box: BoxSpec, variant: str = "plain") -> np.ndarray:
    """log (1+|j|_1) for ``plain``, log (1+<j>) for ``tilde``"""
    if variant == "plain":
        return np.log1p(box.radii)
    if variant == "tilde":
        return np.log1p(np.maximum(box.radii, 1.0))
    raise ValueError(f"Unknown norm variant: {variant}")


def log_sigma_norm(q: StateVector, sigma: float, variant: str = "plain") -> float:
    """log of ``sigma_norm``; -inf for the zero state"""
    log_weights = log_site_weights(q.box, variant)
    moduli = np.abs(q.amplitudes)
    nonzero = moduli > 0
    if not np.any(nonzero):
        return -math.inf
    logs = np.log(moduli[nonzero]) + sigma * log_weights[nonzero]
    return float(np.max(logs))


def sigma_norm(q: StateVector, sigma: float, variant: str = "plain") -> float:
    """sup_j |q_j| w_j^sigma; inf when the weighted sup overflows"""
    log_norm = log_sigma_norm(q, sigma, variant)
    if log_norm == -math.inf:
        return 0.0
    with np.errstate(over='ignore'):
        return float(np.exp(log_norm))
