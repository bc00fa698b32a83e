"""
Poisson bracket of sparse (J, q, q̄) polynomials.

    {H, G} = i sum_j (dH/dq_j dG/dq̄_j - dH/dq̄_j dG/dq_j)

with dJ_j/dq_j = eps^-1 q̄_j and dJ_j/dq̄_j = eps^-1 q_j. Per site j and per
pair of monomials mu = (â, b̂, ĉ), m = (ã, b̃, c̃) this leaves two terms:

    J-term:   eps^-1 (â_j (c̃_j - b̃_j) + ã_j (b̂_j - ĉ_j))   J_j^(A-1) q_j^B q̄_j^C
    qq̄-term:  (b̂_j c̃_j - b̃_j ĉ_j)                         J_j^A q_j^(B-1) q̄_j^(C-1)

where A, B, C are the summed exponents at j. Only sites in both supports
contribute.
"""
import logging
from functools import lru_cache
from typing import Dict, Iterator, List, NamedTuple, Tuple

from hamiltonian.polynomial import HamPoly, MonomialKey
from lattice.geometry import Site

logger = logging.getLogger(__name__)

SiteExponents = Tuple[int, int, int]


class PairContribution(NamedTuple):
    mu: MonomialKey
    m: MonomialKey
    n: MonomialKey
    value: complex


class BracketMargin(NamedTuple):
    mu: MonomialKey
    m: MonomialKey
    n: MonomialKey
    ratio: float


@lru_cache(maxsize=200_000)
def site_view(key: MonomialKey) -> Dict[Site, SiteExponents]:
    """Exponents (alpha_j, beta_j, gamma_j) per site of the support"""
    view: Dict[Site, List[int]] = {}
    for slot, index in enumerate(key):
        for site, exponent in index:
            view.setdefault(site, [0, 0, 0])[slot] = exponent
    return {site: tuple(exps) for site, exps in view.items()}


def key_from_view(view: Dict[Site, SiteExponents]) -> MonomialKey:
    sites = sorted(view)
    return MonomialKey(
        tuple((s, view[s][0]) for s in sites if view[s][0]),
        tuple((s, view[s][1]) for s in sites if view[s][1]),
        tuple((s, view[s][2]) for s in sites if view[s][2]),
    )


def _by_site(P: HamPoly) -> Dict[Site, List[Tuple[MonomialKey, complex]]]:
    groups: Dict[Site, List[Tuple[MonomialKey, complex]]] = {}
    for key, value in P.items():
        for site in site_view(key):
            groups.setdefault(site, []).append((key, value))
    return groups


def _merged(vh: Dict[Site, SiteExponents], vg: Dict[Site, SiteExponents]) -> Dict[Site, SiteExponents]:
    merged = dict(vh)
    for site, (a, b, c) in vg.items():
        if site in merged:
            ah, bh, ch = merged[site]
            merged[site] = (ah + a, bh + b, ch + c)
        else:
            merged[site] = (a, b, c)
    return merged


def _with_site(view: Dict[Site, SiteExponents], site: Site, exps: SiteExponents) -> Dict[Site, SiteExponents]:
    out = dict(view)
    if any(exps):
        out[site] = exps
    else:
        out.pop(site, None)
    return out


def pair_terms(mu: MonomialKey, m: MonomialKey, eps: float, qq_sign: int = -1) -> Iterator[Tuple[MonomialKey, float]]:
    """
    Real factors c such that {J^â q^b̂ q̄^ĉ, J^ã q^b̃ q̄^c̃} = i sum c * monomial(n).

    ``qq_sign`` is -1 for the Poisson bracket; the self-test flips it to
    demonstrate that a corrupted bracket is caught.
    """
    vh, vg = site_view(mu), site_view(m)
    common = sorted(set(vh) & set(vg))
    if not common:
        return
    merged = _merged(vh, vg)
    for j in common:
        ah, bh, ch = vh[j]
        at, bt, ct = vg[j]
        A, B, C = merged[j]
        c_j = (ah * (ct - bt) + at * (bh - ch)) / eps
        if c_j != 0:
            yield key_from_view(_with_site(merged, j, (A - 1, B, C))), c_j
        c_q = bh * ct + qq_sign * bt * ch
        if c_q != 0:
            yield key_from_view(_with_site(merged, j, (A, B - 1, C - 1))), float(c_q)


def iter_pair_contributions(H: HamPoly, G: HamPoly, eps: float, qq_sign: int = -1) -> Iterator[PairContribution]:
    """Contributions of every interacting pair, in canonical (site, H-key, G-key) order"""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    g_groups = _by_site(G)
    for mu, h_value in H.items():
        partners = {}
        for site in site_view(mu):
            for m, g_value in g_groups.get(site, ()):
                partners[m] = g_value
        for m in sorted(partners):
            g_value = partners[m]
            for n, factor in pair_terms(mu, m, eps, qq_sign):
                yield PairContribution(mu, m, n, 1j * factor * (h_value * g_value))


def poisson_bracket(H: HamPoly, G: HamPoly, eps: float, _qq_sign: int = -1) -> HamPoly:
    acc: Dict[MonomialKey, complex] = {}
    for contribution in iter_pair_contributions(H, G, eps, _qq_sign):
        acc[contribution.n] = acc.get(contribution.n, 0j) + contribution.value
    return HamPoly(acc)


def pair_coefficient_bound(n: MonomialKey, mu: MonomialKey, m: MonomialKey, eps: float) -> float:
    """
    2 eps^-1 2^|n| (Delta(mu) + Delta(m)) (|n| + 2)^2 for unit coefficients.

    The spread factor is floored at 1: two single-site monomials have zero
    total spread but a nonzero bracket.
    """
    spread = max(mu.spread + m.spread, 1)
    return 2.0 / eps * 2.0 ** n.degree * spread * (n.degree + 2) ** 2


def bracket_bound_margin(H: HamPoly, G: HamPoly, eps: float) -> List[BracketMargin]:
    """Per (mu, m, n) ratio of |{H(mu), G(m)}(n)| to the pairwise bracket estimate"""
    pair_sums: Dict[Tuple[MonomialKey, MonomialKey, MonomialKey], complex] = {}
    for c in iter_pair_contributions(H, G, eps):
        triple = (c.mu, c.m, c.n)
        pair_sums[triple] = pair_sums.get(triple, 0j) + c.value
    margins = []
    for (mu, m, n), value in pair_sums.items():
        rhs = pair_coefficient_bound(n, mu, m, eps) * abs(H[mu]) * abs(G[m])
        margins.append(BracketMargin(mu, m, n, abs(value) / rhs))
    return margins


class LawViolation(NamedTuple):
    law: str
    mu: MonomialKey
    m: MonomialKey
    n: MonomialKey


def bracket_law_violations(H: HamPoly, G: HamPoly, eps: float, d: int) -> List[LawViolation]:
    """
    Check the structural laws of every contributing pair:
    degree  |n| = |mu| + |m| - 2,
    spread  Delta(n) <= Delta(mu) + Delta(m) (and the (|n|-2)/4 envelope when both inputs satisfy it),
    radius  mu+, m+ <= n+ + d (Delta(mu) + Delta(m)).
    """
    violations = []
    seen = set()
    for c in iter_pair_contributions(H, G, eps):
        triple = (c.mu, c.m, c.n)
        if triple in seen:
            continue
        seen.add(triple)
        mu, m, n = triple
        if n.degree != mu.degree + m.degree - 2:
            violations.append(LawViolation("degree", mu, m, n))
        if n.spread > mu.spread + m.spread:
            violations.append(LawViolation("spread", mu, m, n))
        if 4 * mu.spread <= mu.degree - 2 and 4 * m.spread <= m.degree - 2 and 4 * n.spread > n.degree - 2:
            violations.append(LawViolation("spread_envelope", mu, m, n))
        if not n.support:
            continue
        reach = n.n_plus + d * (mu.spread + m.spread)
        if mu.n_plus > reach or m.n_plus > reach:
            violations.append(LawViolation("radius", mu, m, n))
    return violations


def iterated_bracket(H: HamPoly, F: HamPoly, eps: float, times: int) -> HamPoly:
    """{H, F}^(l): {H,F}^(0) = H, {H,F}^(l) = {{H,F}^(l-1), F}"""
    result = H
    for _ in range(times):
        result = poisson_bracket(result, F, eps)
    return result

