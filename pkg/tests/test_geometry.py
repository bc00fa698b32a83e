#!/usr/bin/env python3
"""
Lattice sites, multi-index statistics and weighted norms
"""
import sys
import os
# Add parent directory to path to import project modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from lattice.geometry import (
    BoxSpec,
    EmptySupport,
    StateVector,
    add_indices,
    bracket_radius,
    canonical,
    extremal_radii,
    index_stats,
    l1_norm,
    log_sigma_norm,
    log_site_weights,
    sigma_norm,
    subtract_indices,
    support,
)


def test_l1_norm():
    assert l1_norm((0, 0)) == 0
    assert l1_norm((1, -2)) == 3
    assert l1_norm((-3, 4, 5)) == 12
    assert bracket_radius((0,)) == 1
    assert bracket_radius((2, -1)) == 3


def test_index_stats():
    stats = index_stats(canonical({(0,): 2}))
    assert stats.supp == ((0,),)
    assert stats.spread == 0 and stats.total == 2

    stats = index_stats(canonical({(0,): 1, (1,): 1, (3,): 2}))
    assert stats.spread == 3 and stats.total == 4

    stats = index_stats(())
    assert stats.supp == () and stats.spread == 0 and stats.total == 0


def test_signed_index_total_counts_magnitudes():
    k = subtract_indices(canonical({(0,): 1}), canonical({(1,): 2}))
    assert k == (((0,), 1), ((1,), -2))
    assert index_stats(k).total == 3


def test_extremal_radii():
    assert extremal_radii(canonical({(2,): 1, (-1,): 1})) == (1, 2)
    assert extremal_radii(canonical({(0,): 3})) == (0, 0)
    assert extremal_radii(canonical({(1, 1): 1, (0, -3): 2})) == (2, 3)
    with pytest.raises(EmptySupport):
        extremal_radii(())


def test_canonical_merges_and_drops_zeros():
    assert canonical([((1,), 2), ((0,), 1), ((1,), -2)]) == (((0,), 1),)


def test_sigma_norm():
    box = BoxSpec(1, 2)
    assert sigma_norm(StateVector.zeros(box), 2.0) == 0.0

    q = StateVector.from_sites(box, {(0,): 0.5})
    assert sigma_norm(q, 2.0, "plain") == pytest.approx(0.5)
    assert sigma_norm(q, 2.0, "tilde") == pytest.approx(2.0)

    q = StateVector.from_sites(box, {(2,): 0.1})
    assert sigma_norm(q, 2.0) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        sigma_norm(q, 2.0, "other")


def test_sigma_norm_at_large_sigma():
    box = BoxSpec(1, 2)
    q = StateVector.from_sites(box, {(0,): 0.5})
    assert sigma_norm(q, 2000.0, "plain") == pytest.approx(0.5)
    assert sigma_norm(q, 2000.0, "tilde") == math.inf
    assert log_sigma_norm(q, 2000.0, "tilde") == pytest.approx(math.log(0.5) + 2000.0 * math.log(2.0))

    q = StateVector.from_sites(box, {(2,): 1e-300})
    sigma = 2.0 ** 10
    assert log_sigma_norm(q, sigma) == pytest.approx(math.log(1e-300) + sigma * math.log(3.0))
    assert sigma_norm(q, sigma) == pytest.approx(math.exp(math.log(1e-300) + sigma * math.log(3.0)), rel=1e-9)
    assert sigma_norm(StateVector.zeros(box), sigma, "tilde") == 0.0


def _random_index(rng, box, max_sites=3):
    sites = [box.sites[i] for i in rng.choice(box.size, size=int(rng.integers(1, max_sites + 1)), replace=False)]
    return canonical({site: int(rng.integers(1, 4)) for site in sites})


def test_index_laws_on_random_indices():
    rng = np.random.default_rng(12)
    box = BoxSpec(2, 1)
    checked = 0
    for _ in range(500):
        a, b = _random_index(rng, box), _random_index(rng, box)
        assert canonical(canonical(a)) == a
        assert canonical(list(reversed(a))) == a
        for index in (a, b, add_indices(a, b)):
            radii = extremal_radii(index)
            assert radii.k_minus <= radii.n_plus
        if set(support(a)) & set(support(b)):
            checked += 1
            assert index_stats(add_indices(a, b)).spread <= index_stats(a).spread + index_stats(b).spread
    assert checked > 50


def test_tilde_weights_dominate_plain_weights():
    rng = np.random.default_rng(13)
    for d, L in ((1, 4), (2, 2), (3, 1)):
        box = BoxSpec(d, L)
        assert np.all(log_site_weights(box, "tilde") >= log_site_weights(box, "plain"))
        for sigma in (0.5, 2.0, 40.0):
            q = StateVector(box, rng.normal(size=box.size) + 1j * rng.normal(size=box.size))
            assert sigma_norm(q, sigma, "tilde") >= sigma_norm(q, sigma, "plain")


def test_box_layout():
    box = BoxSpec(2, 1)
    assert box.size == 9 == len(box.sites)
    assert box.sites[0] == (-1, -1) and box.index[(0, 0)] == 4
    assert box.on_boundary((1, 0)) and not box.on_boundary((0, 0))
    assert box.neighbours((1, 1)) == [(0, 1), (1, 0)]
    assert np.array_equal(BoxSpec(1, 2).radii, [2, 1, 0, 1, 2])
    with pytest.raises(ValueError):
        BoxSpec(0, 1)


if __name__ == "__main__":
    test_l1_norm()
    test_index_stats()
    test_signed_index_total_counts_magnitudes()
    test_extremal_radii()
    test_canonical_merges_and_drops_zeros()
    test_sigma_norm()
    test_sigma_norm_at_large_sigma()
    test_index_laws_on_random_indices()
    test_tilde_weights_dominate_plain_weights()
    test_box_layout()
    print("Lattice geometry tests passed!")
