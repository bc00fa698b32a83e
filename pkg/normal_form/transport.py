"""
Numerical transport of lattice states along the generator flows.

The flow of a generator F solves q' = +i dF/dq̄, so that G o X_F^t evolves by
{G, F}. The normal-form change of variables is Phi = X_F1 o X_F2 o ...:
"forward" maps normal-form coordinates to the original ones (last generator
first), "inverse" applies the generators in list order backwards in time.
"""
import logging
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from config.config import Config
from config.errors import NumericalFailure
from hamiltonian.numeric import CompiledPoly, zeta_array
from hamiltonian.polynomial import HamPoly
from lattice.geometry import StateVector, log_site_weights, sigma_norm

logger = logging.getLogger(__name__)

DIRECTIONS = ("forward", "inverse")


class FlowIntegrationFailure(NumericalFailure):
    pass


class TransportResult(NamedTuple):
    state: StateVector
    displacement: np.ndarray
    weighted_sup: float


def generator_flow(F: HamPoly, q: StateVector, t: float, zeta, eps: float) -> StateVector:
    """X_F^t(q) by adaptive integration at relative tolerance Config.FLOW_RTOL"""
    if F.is_zero() or t == 0:
        return q.copy()
    box = q.box
    poly = CompiledPoly(F, box)
    z = zeta_array(zeta, box)
    n = box.size

    def rhs(_, y):
        state = y[:n] + 1j * y[n:]
        _, grad = poly.gradients(state, z, eps, want_dq=False)
        velocity = 1j * grad
        return np.concatenate([velocity.real, velocity.imag])

    y0 = np.concatenate([q.amplitudes.real, q.amplitudes.imag])
    scale = max(float(np.max(np.abs(y0))), 1e-300)
    sol = solve_ivp(rhs, (0.0, t), y0, method=Config.FLOW_METHOD,
                    rtol=Config.FLOW_RTOL, atol=Config.FLOW_RTOL * scale)
    if not sol.success:
        raise FlowIntegrationFailure(f"Generator flow failed: {sol.message}")
    y = sol.y[:, -1]
    return StateVector(box, y[:n] + 1j * y[n:])


def transport_state(q: StateVector, generators: Sequence[HamPoly], direction: str, zeta, eps: float,
                    sigma: float = 1.0) -> TransportResult:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction}")
    if direction == "forward":
        order, t = list(reversed(generators)), 1.0
    else:
        order, t = list(generators), -1.0

    state = q.copy()
    for F in order:
        state = generator_flow(F, state, t, zeta, eps)
    displacement = np.abs(state.amplitudes - q.amplitudes)
    weighted = sigma_norm(StateVector(q.box, displacement), sigma)
    logger.debug(f"Transport {direction} through {len(order)} generators: weighted displacement {weighted:.3e}")
    return TransportResult(state, displacement, weighted)


def j_bound_profile(q: StateVector, zeta, eps: float, sigma: float) -> np.ndarray:
    """eps^-1 ||q_j|^2 - zeta_j| (1+|j|_1)^(3 sigma) per site"""
    z = zeta_array(zeta, q.box)
    deviation = np.abs(q.actions() - z) / eps
    with np.errstate(over='ignore'):
        return deviation * np.exp(3 * sigma * log_site_weights(q.box, "plain"))
