#!/usr/bin/env python3
"""
Equations of motion, the split-step integrator and the action-drift diagnostics
"""
import sys
import os
# Add parent directory to path to import project modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from dynamics.diagnostics import (
    DerivativeBoundChecker,
    PreconditionViolated,
    action_drift_report,
    admissible_state,
    derivative_bound_check,
    linear_drift_envelope,
    locality_profile,
)
from dynamics.integrator import (
    DiagonalFlow,
    IntegratorConfig,
    NotDiagonal,
    Trajectory,
    diagonal_flow_exact,
    eom_rhs,
    integrate,
    split_diagonal,
)
from hamiltonian.model import (
    build_model_hamiltonian,
    original_hamiltonian,
    quadratic_part,
    short_range_family,
    unscale_state,
)
from hamiltonian.numeric import CompiledPoly
from hamiltonian.polynomial import HamPoly
from hamiltonian.random_poly import random_state
from lattice.geometry import BoxSpec, StateVector, sigma_norm, unit_index
from media.sampling import sample_inner, sample_media

SINGLE = BoxSpec(1, 0)
BOX = BoxSpec(1, 1)


def _hopping_model():
    """Distinct frequencies, a quartic self-interaction and a real hopping term between sites 0 and 1"""
    H = quadratic_part([1.0, 1.3, 1.7], BOX)
    H = H + HamPoly.monomial(0.25, beta=unit_index((-1,), 2), gamma=unit_index((-1,), 2))
    H = H + HamPoly.monomial(0.5, beta=unit_index((0,)), gamma=unit_index((1,)))
    H = H + HamPoly.monomial(0.5, beta=unit_index((1,)), gamma=unit_index((0,)))
    return H


def _initial_state(scale=0.1):
    return StateVector(BOX, scale * np.array([1.0 + 0.5j, -0.7 + 0.2j, 0.3 - 0.9j]))


def test_eom_rhs():
    H = quadratic_part([2.0], SINGLE)
    q = StateVector(SINGLE, [0.3 + 0.4j])
    assert eom_rhs(H, q, None, 1.0).amplitudes[0] == pytest.approx(-2j * (0.3 + 0.4j))

    H = _hopping_model()
    q = _initial_state()
    rhs = eom_rhs(H, q, None, 1.0).amplitudes
    # q_0' = -i (1.3 q_0 + 0.5 q_1)
    assert rhs[BOX.index[(0,)]] == pytest.approx(-1j * (1.3 * q[(0,)] + 0.5 * q[(1,)]))


def test_energy_is_conserved_along_the_field():
    rng = np.random.default_rng(3)
    box = BoxSpec(1, 2)
    eps = 0.05
    H = build_model_hamiltonian(box, eps, short_range_family(box), sample_inner(3, box, 2.0), sample_media(3, box))
    zeta = sample_inner(3, box, 2.0)
    for _ in range(5):
        q = random_state(rng, box, scale=0.3)
        dq, _ = CompiledPoly(H, box).gradients(q.amplitudes, zeta.zeta, eps)
        velocity = eom_rhs(H, q, zeta, eps).amplitudes
        # dH/dt = 2 Re(sum dH/dq q')
        power = 2 * np.sum(dq * velocity).real
        assert abs(power) <= 1e-12 * np.sum(np.abs(dq) * np.abs(velocity))


def test_diagonal_flow():
    H_diag, H_rest = split_diagonal(_hopping_model())
    assert len(H_rest) == 2 and len(H_diag) == 4

    flow = DiagonalFlow(quadratic_part([2.0], SINGLE), SINGLE, None, 1.0)
    q = np.array([0.6 - 0.2j])
    assert np.allclose(flow.apply(q, math.pi / 2), -q, atol=1e-15)

    q = _initial_state(0.8)
    once = diagonal_flow_exact(diagonal_flow_exact(q, H_diag, 0.3, None, 1.0), H_diag, 0.4, None, 1.0)
    direct = diagonal_flow_exact(q, H_diag, 0.7, None, 1.0)
    assert np.allclose(once.amplitudes, direct.amplitudes, rtol=0, atol=1e-14)
    assert np.allclose(np.abs(direct.amplitudes), np.abs(q.amplitudes), rtol=1e-14)

    with pytest.raises(NotDiagonal):
        DiagonalFlow(H_rest, BOX, None, 1.0)


def test_integrable_dynamics_keep_the_actions():
    box = BoxSpec(1, 2)
    eps = 0.05
    zeta, media = sample_inner(1, box, 2.0), sample_media(1, box)
    H = build_model_hamiltonian(box, eps, HamPoly.zero(), zeta, media)
    q0 = admissible_state(box, 1.0, 2.0, np.random.default_rng(4))
    traj = integrate(H, q0, IntegratorConfig(dt=1e-3, T=10.0, sample_every=100), zeta=zeta, eps=eps)
    assert len(traj) == 101
    assert np.allclose(traj.actions, traj.actions[0], rtol=1e-12, atol=0)
    assert action_drift_report(traj, 2.0, eps).escape_time is None


def test_strang_is_second_order():
    H = _hopping_model()
    q0 = _initial_state()
    reference = integrate(H, q0, IntegratorConfig(dt=1e-3, T=1.0, scheme="rk4_reference", sample_every=100))
    errors, energy_errors = [], []
    for dt in (0.02, 0.01):
        traj = integrate(H, q0, IntegratorConfig(dt=dt, T=1.0, sample_every=int(round(0.1 / dt))))
        assert np.allclose(traj.times, reference.times)
        errors.append(np.max(np.abs(traj.final.amplitudes - reference.final.amplitudes)))
        energy_errors.append(np.max(np.abs(traj.energies - traj.energies[0])))
    print(f"Strang errors {errors[0]:.3e}, {errors[1]:.3e}; energy {energy_errors[0]:.3e}, {energy_errors[1]:.3e}")
    assert 3 <= errors[0] / errors[1] <= 5
    assert 3 <= energy_errors[0] / energy_errors[1] <= 5


def test_total_action_is_conserved():
    H = _hopping_model()
    assert all(sum(e for _, e in key.beta) == sum(e for _, e in key.gamma) for key in H)
    q0 = _initial_state()
    traj = integrate(H, q0, IntegratorConfig(dt=1e-3, T=100.0, sample_every=1000))
    assert len(traj) == 101
    mass = traj.actions.sum(axis=1)
    assert np.max(np.abs(mass - mass[0])) < 1e-10
    # the hopping term moves action between sites 0 and 1
    assert np.ptp(traj.actions[:, BOX.index[(0,)]]) > 1e-4


def test_coupled_lattice_stays_localized():
    box = BoxSpec(1, 4)
    eps, sigma = 1e-2, 2.0
    H = original_hamiltonian(box, sample_media(7, box), short_range_family(box))
    q0 = unscale_state(admissible_state(box, 1.0, sigma, np.random.default_rng(8)), eps)
    assert sigma_norm(q0, sigma, "tilde") <= eps
    traj = integrate(H, q0, IntegratorConfig(dt=1e-3, T=5.0, sample_every=100))

    report = action_drift_report(traj, sigma, eps)
    assert report.escape_time is None
    assert report.weighted_sup < eps ** 2
    assert np.max(np.abs(traj.energies - traj.energies[0])) < 1e-8 * abs(traj.energies[0])
    assert not locality_profile(traj, sigma, eps)["ratio"].ge(1).any()


def test_forward_backward_round_trip():
    H = _hopping_model()
    q0 = _initial_state()
    cfg = IntegratorConfig(dt=0.01, T=1.0, sample_every=10)
    forward = integrate(H, q0, cfg)
    back = integrate(H, forward.final, cfg, backward=True)
    assert back.times[-1] == pytest.approx(-1.0)
    assert np.max(np.abs(back.final.amplitudes - q0.amplitudes)) < 1e-9

    reference = integrate(H, q0, IntegratorConfig(dt=0.01, T=1.0, scheme="rk4_reference", sample_every=10))
    assert np.max(np.abs(forward.final.amplitudes - reference.final.amplitudes)) < 1e-4 * 0.1


def test_integrator_config():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=2.0, T=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.1, T=1.0, scheme="euler")
    assert IntegratorConfig(dt=0.1, T=1.0).n_steps == 10


def _synthetic(box, times, actions):
    amplitudes = np.sqrt(np.asarray(actions, dtype=float)).astype(complex)
    return Trajectory(box, np.asarray(times), amplitudes, np.zeros(len(times)))


def test_drift_report():
    eps = 0.1
    times = np.arange(11.0)
    flat = _synthetic(BOX, times, np.full((11, BOX.size), 0.01))
    report = action_drift_report(flat, 2.0, eps)
    assert report.weighted_sup == 0.0 and report.escape_time is None
    assert not np.any(report.per_site)

    actions = np.full((11, BOX.size), 0.01)
    actions[5:, BOX.index[(1,)]] += 2 * eps ** 2
    jump = _synthetic(BOX, times, actions)
    report = action_drift_report(jump, 2.0, eps)
    assert report.escape_time == 5.0
    assert report.per_site[BOX.index[(1,)]] == pytest.approx(2 * eps ** 2)
    assert np.all(np.diff(report.weighted_series) >= 0)
    assert report.to_dict()["escape_time"] == 5.0


def test_locality_profile():
    eps = 0.1
    actions = np.full((3, BOX.size), 0.01)
    actions[2, BOX.index[(0,)]] += eps ** 2 / 2
    frame = locality_profile(_synthetic(BOX, [0.0, 1.0, 2.0], actions), 1.0, eps)
    assert list(frame.columns) == ["site", "radius", "max_drift", "threshold", "ratio", "boundary"]
    assert list(frame["site"]) == ["-1", "0", "1"]
    assert list(frame["boundary"]) == [True, False, True]
    origin = frame[frame["site"] == "0"].iloc[0]
    assert origin["threshold"] == pytest.approx(eps ** 2)
    assert origin["ratio"] == pytest.approx(0.5)
    assert frame[frame["site"] == "1"].iloc[0]["threshold"] == pytest.approx(eps ** 2 / 8)


def test_linear_drift_envelope():
    eps, sigma, rate = 0.5, 1.0, 1e-3
    times = np.linspace(0.0, 2.0, 5)
    actions = np.full((5, BOX.size), 0.1)
    actions[:, BOX.index[(0,)]] += rate * times
    envelope = linear_drift_envelope(_synthetic(BOX, times, actions), sigma, eps)
    # eps^5 (1 + <0>)^(-3) 2^(-1) = 1/512
    assert envelope["max_ratio"] == pytest.approx(rate * 512, rel=1e-9)
    assert envelope["per_site"][BOX.index[(1,)]] == 0.0


def test_derivative_bound():
    box = BoxSpec(1, 3)
    eps, sigma = 2.0 ** -22, 3.0
    R = short_range_family(box)
    zero = derivative_bound_check(StateVector.zeros(box), R, sigma, eps, 1)
    assert zero["pass"] and not np.any(zero["ratios"])

    checker = DerivativeBoundChecker(R, box, eps)
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        ratios = checker.ratios(admissible_state(box, 2 * eps, sigma, rng), sigma)
        worst = max(worst, float(np.max(ratios)))
    assert worst <= 1.0

    # the weighted norm is infinite here and must not slip through
    with pytest.raises(PreconditionViolated):
        checker.ratios(StateVector.from_sites(box, {(1,): eps}), 2.0 ** 10)

    q = admissible_state(box, 2 * eps, sigma, rng)
    q.amplitudes[box.index[(0,)]] = eps / 10
    with pytest.raises(PreconditionViolated):
        derivative_bound_check(q, R, sigma, eps, 1)
    with pytest.raises(PreconditionViolated):
        derivative_bound_check(admissible_state(box, 4 * eps, sigma, np.random.default_rng(0)), R, sigma, 1e-3, 1)
    with pytest.raises(PreconditionViolated):
        derivative_bound_check(StateVector.zeros(box), R, sigma, eps, 2)


if __name__ == "__main__":
    test_eom_rhs()
    test_energy_is_conserved_along_the_field()
    test_diagonal_flow()
    test_integrable_dynamics_keep_the_actions()
    test_strang_is_second_order()
    test_total_action_is_conserved()
    test_coupled_lattice_stays_localized()
    test_forward_backward_round_trip()
    test_integrator_config()
    test_drift_report()
    test_locality_profile()
    test_linear_drift_envelope()
    test_derivative_bound()
    print("Dynamics tests passed!")
