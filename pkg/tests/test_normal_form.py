#!/usr/bin/env python3
"""
Homological equation, Lie transform, the normal-form iteration with its
bound ledger, checkpoint resume and state transport
"""
import sys
import os
# Add parent directory to path to import project modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import filecmp
import math
import tempfile
from functools import lru_cache

import numpy as np
import pytest

from config.errors import ConfigError
from dynamics.diagnostics import admissible_state
from hamiltonian.bracket import poisson_bracket
from hamiltonian.model import build_model_hamiltonian, quadratic_part, short_range_family
from hamiltonian.numeric import evaluate
from hamiltonian.polynomial import HamPoly, monomial_key, split_resonant
from hamiltonian.random_poly import random_poly, random_state, random_zeta
from lattice.geometry import BoxSpec, unit_index
from media.nonresonance import check_nonresonance
from media.sampling import FrequencyMap, frequencies, sample_inner, sample_media
from normal_form.checkpoint import checkpoint_path, load_stage, save_stage
from normal_form.engine import (
    BnfConfig,
    EpsTooLarge,
    bnf_step,
    choose_M,
    initial_stage,
    iterated_remainder_bound,
    run_bnf,
    theorem_time_scales,
)
from normal_form.homological import (
    ResonantTerm,
    SmallDivisorViolation,
    homological_residual,
    solve_homological,
)
from normal_form.ledger import BoundLedger, BoundViolation, log_stage_bound
from normal_form.lie import lie_transform
from normal_form.transport import generator_flow, j_bound_profile, transport_state

SEED = 1


def _instance(L, eps=1e-3, sigma=2.0, seed=SEED):
    box = BoxSpec(1, L)
    media, zeta = sample_media(seed, box), sample_inner(seed, box, sigma)
    omega = frequencies(media, zeta, eps)
    H1 = build_model_hamiltonian(box, eps, short_range_family(box), zeta, media)
    return box, zeta, omega, H1


@lru_cache(maxsize=None)
def _desk_run(L=4):
    """One uninterrupted run with every stage kept"""
    box, zeta, omega, H1 = _instance(L)
    config = BnfConfig(1e-3, 0.1, 2.0, 1, 8, box)
    stages = []
    result = run_bnf(H1, omega, config, on_stage=stages.append)
    return config, omega, H1, result, stages


def test_choose_M():
    choice = choose_M(1e-40, 2.0)
    assert choice.formula == pytest.approx(92.1034 / (200 * math.log(92.1034)), rel=1e-4)
    assert choice.M == 6
    assert choice.remainder_exponent == pytest.approx(0.24 * 6)
    with pytest.raises(EpsTooLarge):
        choose_M(0.1, 2.0)
    with pytest.raises(EpsTooLarge):
        choose_M(0.0, 2.0)


def test_bnf_config():
    box = BoxSpec(1, 2)
    config = BnfConfig(1e-3, 0.1, 2.0, 1, 10, box)
    assert (config.M_star, config.planned_steps, config.cap_spread) == (2, 3, 2)
    with pytest.raises(ConfigError):
        BnfConfig(1e-3, 0.1, 2.0, 1, 4, box)
    with pytest.raises(ConfigError):
        BnfConfig(1e-3, 0.1, 2.0, 2, 8, box)


def test_homological_single_term():
    box = BoxSpec(1, 1)
    omega = FrequencyMap(box, [7.0, 2.0, 5.0])
    coeff = 0.3 - 0.1j
    R = HamPoly.monomial(coeff, beta=unit_index((0,)), gamma=unit_index((1,)))
    F = solve_homological(R, omega, eta=1e-3, M=4, sigma=1.0)
    key = monomial_key(beta=unit_index((0,)), gamma=unit_index((1,)))
    assert F[key] == pytest.approx(coeff * 1j / 3)

    with pytest.raises(ResonantTerm):
        solve_homological(HamPoly.monomial(1.0, beta=unit_index((0,), 2), gamma=unit_index((0,), 2)),
                          omega, 1e-3, 4, 1.0)
    degenerate = FrequencyMap(box, [7.0, 2.0, 2.0])
    with pytest.raises(SmallDivisorViolation):
        solve_homological(R, degenerate, 1e-3, 4, 1.0)


def test_homological_identity_at_random_states():
    rng = np.random.default_rng(12)
    box, zeta, omega, _ = _instance(2, eps=0.1)
    D = quadratic_part(omega.omega, box)
    for _ in range(5):
        _, R = split_resonant(random_poly(rng, box, max_degree=6, min_degree=6, n_terms=6, with_J=False))
        F = solve_homological(R, omega, eta=1e-6, M=6, sigma=2.0)
        assert homological_residual(D, F, R, 0.1) < 1e-10 * R.max_abs()
        residual = poisson_bracket(D, F, 0.1) + R
        for _ in range(20):
            assert abs(evaluate(residual, random_state(rng, box, scale=0.5))) < 1e-10


def test_lie_transform_trivial_cases():
    rng = np.random.default_rng(13)
    box = BoxSpec(1, 1)
    H = random_poly(rng, box, max_degree=6)
    result = lie_transform(H, HamPoly.zero(), 3, 0.5, 20, 5)
    assert result.transformed == H and result.remainder == 0.0

    actions = HamPoly({monomial_key(alpha=unit_index((0,))): 1.0,
                       monomial_key(beta=unit_index((1,), 2), gamma=unit_index((1,), 2)): 0.5})
    F = HamPoly({monomial_key(alpha=unit_index((1,)), beta=unit_index((0,)), gamma=unit_index((0,))): 0.2})
    result = lie_transform(actions, F, 3, 0.5, 20, 5)
    assert result.transformed == actions and result.remainder == 0.0
    with pytest.raises(ValueError):
        lie_transform(H, F, 0, 0.5, 20, 5)


def test_lie_transform_matches_generator_flow():
    rng = np.random.default_rng(14)
    box = BoxSpec(1, 1)
    eps = 0.5
    for _ in range(3):
        H = random_poly(rng, box, max_degree=6, n_terms=3)
        F = random_poly(rng, box, max_degree=4, min_degree=4, n_terms=2).scale(0.02)
        result = lie_transform(H, F, 8, eps, 60, 10)
        for _ in range(10):
            q = random_state(rng, box, scale=0.5)
            zeta = random_zeta(rng, box)
            flowed = generator_flow(F, q, 1.0, zeta, eps)
            expected = evaluate(H, flowed, zeta, eps)
            assert abs(evaluate(result.transformed, q, zeta, eps) - expected) <= 1e-5 * max(1.0, abs(expected))


def test_step_without_target_appends_zero_generator():
    box, _, omega, _ = _instance(1)
    config = BnfConfig(1e-3, 0.1, 2.0, 1, 8, box)
    H1 = build_model_hamiltonian(box, 1e-3, HamPoly.zero(), sample_inner(SEED, box, 2.0), sample_media(SEED, box))
    stage = initial_stage(H1, omega, config, BoundLedger(1e-3, 0.1, 2.0, 1))
    following = bnf_step(stage, config)
    assert following.s == stage.s + 1
    assert following.Z == stage.Z and following.R == stage.R
    assert len(following.generators) == 1 and following.generators[0].is_zero()


def test_integrable_input_is_already_normal():
    box, zeta, omega, _ = _instance(2)
    H1 = build_model_hamiltonian(box, 1e-3, HamPoly.zero(), zeta, sample_media(SEED, box))
    result = run_bnf(H1, omega, BnfConfig(1e-3, 0.1, 2.0, 1, 8, box))
    assert result.Z_final == H1.homogeneous_part(4)
    assert all(F.is_zero() for F in result.generators)
    assert result.remainder_bound == 0.0


def test_desk_instance_normal_form():
    config, omega, H1, result, stages = _desk_run()
    assert check_nonresonance(omega, config.eta, config.M, config.sigma, config.box).passed
    assert len(stages) == config.planned_steps + 1

    for before, after in zip(stages, stages[1:]):
        target = 2 * before.s + 4
        assert after.R.homogeneous_part(target).max_abs() < 1e-12
        R_target = before.R.homogeneous_part(target)
        assert homological_residual(before.D, after.generators[-1], R_target, config.eps) < 1e-12

    assert result.Z_final
    assert all(key.is_resonant for key in result.Z_final)
    assert result.report["max_bound_ratio"] <= 1
    assert result.report["steps"] == 2 and result.report["M_star"] == 2
    assert all(entry["max_bound_ratio"] <= 1 for entry in result.report["stages"])
    assert result.remainder_bound < config.eps


def test_resume_reproduces_checkpoints():
    box, _, omega, H1 = _instance(2)
    config = BnfConfig(1e-3, 0.1, 2.0, 1, 8, box)
    with tempfile.TemporaryDirectory() as full_dir, tempfile.TemporaryDirectory() as resumed_dir:
        full = run_bnf(H1, omega, config, on_stage=lambda st: save_stage(st, full_dir, {"run": "x"}))
        start = load_stage(checkpoint_path(full_dir, 2), box)
        resumed = run_bnf(H1, omega, config, start=start,
                          on_stage=lambda st: save_stage(st, resumed_dir, {"run": "x"}))
        assert resumed.Z_final == full.Z_final
        assert resumed.report["max_bound_ratio"] == full.report["max_bound_ratio"]
        last = config.planned_steps + 1
        assert filecmp.cmp(checkpoint_path(full_dir, last), checkpoint_path(resumed_dir, last), shallow=False)


def test_ledger():
    eps, eta, sigma = 1e-3, 0.1, 2.0
    key = monomial_key(beta=unit_index((0,), 3), gamma=unit_index((0,), 3))
    expected = 2 * math.log(eps / eta) + 4 * sigma * 6 * 2 * math.log(36)
    assert log_stage_bound(key, eps, eta, sigma, 1) == pytest.approx(expected)

    ledger = BoundLedger(eps, eta, sigma, 1)
    assert ledger.record(1, HamPoly({key: eps ** 2})) < 1
    quartic = monomial_key(beta=unit_index((0,), 2), gamma=unit_index((0,), 2))
    with pytest.raises(BoundViolation):
        ledger.record(2, HamPoly({quartic: 1.0}))
    assert ledger.record(3, HamPoly({quartic: 1.0}), strict=False) > 1
    assert len(ledger.stages) == 3
    assert BoundLedger.from_dict(ledger.to_dict()).stages == ledger.stages


def test_transport_round_trip():
    config, omega, H1, result, stages = _desk_run()
    box = config.box
    zeta = sample_inner(SEED, box, config.sigma)
    q = admissible_state(box, 1.0, config.sigma, np.random.default_rng(5), zeta=zeta.zeta)
    assert np.allclose(j_bound_profile(q, zeta, config.eps, config.sigma), 0, atol=1e-9)

    assert np.array_equal(transport_state(q, [], "forward", zeta, config.eps).state.amplitudes, q.amplitudes)
    forward = transport_state(q, result.generators, "forward", zeta, config.eps, config.sigma)
    back = transport_state(forward.state, result.generators, "inverse", zeta, config.eps, config.sigma)
    weights = (1 + box.radii) ** config.sigma
    assert np.max(np.abs(back.state.amplitudes - q.amplitudes) * weights) < 1e-8
    assert forward.weighted_sup < config.eps ** 1.5
    for s in range(1, len(result.generators) + 1):
        moved = transport_state(q, result.generators[:s], "forward", zeta, config.eps, config.sigma).state
        bound = 1 + sum(config.eps ** (0.5 * h) for h in range(1, s + 1))
        assert np.max(j_bound_profile(moved, zeta, config.eps, config.sigma)) <= bound
    with pytest.raises(ValueError):
        transport_state(q, result.generators, "sideways", zeta, config.eps)


def test_reported_scales():
    scales = theorem_time_scales(1e-3, 2.0)
    assert scales["log10_derivative_bound_time"] == pytest.approx(9 + 2 * math.log10(2))
    assert scales["log10_normal_form_time"] > 0
    bound = iterated_remainder_bound(1e-3, 8, 2.0, 1, (0,))
    assert bound == pytest.approx(0.24 * 8 * -3 + 4 * 2.0 * 64 * math.log10(48))
    assert iterated_remainder_bound(1e-3, 8, 2.0, 1, (3,)) < bound


if __name__ == "__main__":
    test_choose_M()
    test_bnf_config()
    test_homological_single_term()
    test_homological_identity_at_random_states()
    test_lie_transform_trivial_cases()
    test_lie_transform_matches_generator_flow()
    test_step_without_target_appends_zero_generator()
    test_integrable_input_is_already_normal()
    test_desk_instance_normal_form()
    test_resume_reproduces_checkpoints()
    test_ledger()
    test_transport_round_trip()
    test_reported_scales()
    print("Normal form tests passed!")
