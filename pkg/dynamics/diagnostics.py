"""
Action-drift diagnostics against the localization profiles

    ||q_j(t)|^2 - |q_j(0)|^2| < eps^2 (1 + <j>)^(-3 sigma)

and the pointwise derivative bound |{I_j, H}| <= eps^5 (1 + <j>)^(-3 sigma) 2^(-sigma).
Weights are handled in log space so that large sigma does not underflow.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from config.errors import PropertyViolation
from dynamics.integrator import Trajectory
from hamiltonian.bracket import poisson_bracket
from hamiltonian.model import action_polynomial
from hamiltonian.numeric import CompiledPoly
from hamiltonian.polynomial import HamPoly
from lattice.geometry import BoxSpec, StateVector, l1_norm, log_site_weights, sigma_norm

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


class PreconditionViolated(PropertyViolation):
    pass


def _site_label(site) -> str:
    return str(site[0]) if len(site) == 1 else "(" + ",".join(map(str, site)) + ")"


@dataclass
class DriftReport:
    per_site: np.ndarray
    weighted_sup: float
    escape_time: Optional[float]
    weighted_series: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weighted_sup": self.weighted_sup,
            "escape_time": self.escape_time,
            "per_site": self.per_site.tolist(),
        }


def _log_weighted_drift(traj: Trajectory, sigma: float) -> np.ndarray:
    """(samples x sites) log of |I_j(t) - I_j(0)| (1 + <j>)^(3 sigma)"""
    drift = np.abs(traj.actions - traj.actions[0])
    with np.errstate(divide='ignore'):
        return np.log(drift) + 3 * sigma * log_site_weights(traj.box, "tilde")[None, :]


def action_drift_report(traj: Trajectory, sigma: float, eps: float) -> DriftReport:
    if len(traj) == 0:
        raise ValueError("Empty trajectory")
    log_weighted = _log_weighted_drift(traj, sigma)
    log_sup_t = np.max(log_weighted, axis=1)
    with np.errstate(over='ignore'):
        series = np.maximum.accumulate(np.exp(log_sup_t))
    crossed = np.flatnonzero(log_sup_t >= 2 * math.log(eps))
    escape = float(traj.times[crossed[0]]) if crossed.size else None
    per_site = np.max(np.abs(traj.actions - traj.actions[0]), axis=0)
    report = DriftReport(per_site, float(series[-1]), escape, series)
    if escape is not None:
        logger.warning(f"Weighted drift reached eps^2 at t = {escape:.6g}")
    return report


def locality_profile(traj: Trajectory, sigma: float, eps: float) -> pd.DataFrame:
    """Per-site max drift against eps^2 (1 + |j|_1)^(-3 sigma); boundary sites flagged"""
    box = traj.box
    max_drift = np.max(np.abs(traj.actions - traj.actions[0]), axis=0)
    log_threshold = 2 * math.log(eps) - 3 * sigma * log_site_weights(box, "plain")
    with np.errstate(divide='ignore', over='ignore'):
        ratio = np.exp(np.log(max_drift) - log_threshold)
    return pd.DataFrame({
        "site": [_site_label(j) for j in box.sites],
        "radius": [l1_norm(j) for j in box.sites],
        "max_drift": max_drift,
        "threshold": np.exp(log_threshold),
        "ratio": ratio,
        "boundary": [box.on_boundary(j) for j in box.sites],
    })


def linear_drift_envelope(traj: Trajectory, sigma: float, eps: float) -> Dict[str, Any]:
    """max over t > 0 of |I_j(t) - I_j(0)| / (t eps^5 (1 + <j>)^(-3 sigma) 2^(-sigma))"""
    times = np.abs(traj.times[1:])
    if times.size == 0:
        return {"per_site": [0.0] * traj.box.size, "max_ratio": 0.0}
    drift = np.abs(traj.actions[1:] - traj.actions[0])
    log_rate = derivative_bound_log(traj.box, sigma, eps)
    with np.errstate(divide='ignore', over='ignore'):
        ratios = np.exp(np.log(drift) - np.log(times)[:, None] - log_rate[None, :])
    per_site = np.max(ratios, axis=0)
    return {"per_site": per_site.tolist(), "max_ratio": float(np.max(per_site))}


def derivative_bound_log(box: BoxSpec, sigma: float, eps: float) -> np.ndarray:
    return 5 * math.log(eps) - 3 * sigma * log_site_weights(box, "tilde") - sigma * math.log(2)


class DerivativeBoundChecker:
    """{I_j, R} for every site, built once with the bracket algebra and compiled for evaluation"""

    def __init__(self, R: HamPoly, box: BoxSpec, eps: float):
        self.box = box
        self.eps = eps
        self.brackets = [CompiledPoly(poisson_bracket(action_polynomial(j), R, eps), box) for j in box.sites]

    def check_preconditions(self, q: StateVector, sigma: float) -> None:
        d = self.box.d
        if self.eps >= 2.0 ** (-12 * d - 9):
            raise PreconditionViolated(f"eps = {self.eps:.3e} is not below 2^(-12d-9) = {2.0 ** (-12 * d - 9):.3e}")
        if q[self.box.origin] != 0:
            raise PreconditionViolated("The state must vanish at the origin")
        norm = sigma_norm(q, sigma, "tilde")
        if norm > 2 * self.eps * (1 + NORM_TOLERANCE):
            raise PreconditionViolated(f"Weighted norm {norm:.3e} exceeds 2 eps = {2 * self.eps:.3e}")

    def ratios(self, q: StateVector, sigma: float) -> np.ndarray:
        self.check_preconditions(q, sigma)
        zeta = np.zeros(self.box.size)
        values = np.array([abs(b.value(q.amplitudes, zeta, self.eps)) for b in self.brackets])
        with np.errstate(divide='ignore'):
            return np.exp(np.log(values) - derivative_bound_log(self.box, sigma, self.eps))


def derivative_bound_check(q: StateVector, R: HamPoly, sigma: float, eps: float, d: int) -> Dict[str, Any]:
    if q.box.d != d:
        raise PreconditionViolated(f"State lives in dimension {q.box.d}, expected {d}")
    ratios = DerivativeBoundChecker(R, q.box, eps).ratios(q, sigma)
    return {"ratios": ratios, "pass": bool(np.all(ratios <= 1.0))}


def admissible_state(box: BoxSpec, target_norm: float, sigma: float, rng: np.random.Generator,
                     zeta: Optional[np.ndarray] = None) -> StateVector:
    """
    Random state with random phases. Without zeta: tilde sigma-norm <= target_norm and q_0 = 0.
    With zeta: |q_j|^2 = zeta_j.
    """
    phases = np.exp(2j * np.pi * rng.random(box.size))
    if zeta is not None:
        return StateVector(box, np.sqrt(np.asarray(zeta, dtype=float)) * phases)
    moduli = target_norm * rng.random(box.size) * np.exp(-sigma * log_site_weights(box, "tilde"))
    state = StateVector(box, moduli * phases)
    state.amplitudes[box.index[box.origin]] = 0
    return state
