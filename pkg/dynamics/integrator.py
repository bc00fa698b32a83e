"""
Time integration of i q' = dH/dq̄ on a finite box.

The strang scheme splits H into its diagonal part (beta == gamma, one site per
term), whose flow is an exact phase rotation, and the rest, advanced by one
RK4 substep per step. Adjacent diagonal half steps are merged into one full
rotation between samples.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from tqdm import tqdm

from config.config import Config, SCHEMES
from config.errors import NumericalFailure, PropertyViolation
from hamiltonian.bracket import site_view
from hamiltonian.numeric import CompiledPoly, zeta_array
from hamiltonian.polynomial import HamPoly
from lattice.geometry import BoxSpec, StateVector

logger = logging.getLogger(__name__)


class NotDiagonal(PropertyViolation):
    pass


class StepUnstable(NumericalFailure):
    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t = {time:.6g}")


@dataclass
class IntegratorConfig:
    dt: float
    T: float
    scheme: str = "strang"
    sample_every: int = 1

    def __post_init__(self):
        if not 0 < self.dt <= self.T:
            raise ValueError(f"Need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"Unknown scheme {self.scheme}, expected one of {SCHEMES}")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.T / self.dt)))


@dataclass
class Trajectory:
    box: BoxSpec
    times: np.ndarray
    amplitudes: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(len(self.times), self.box.size)
        self.energies = np.asarray(self.energies, dtype=float)
        if len(self.energies) != len(self.times):
            raise ValueError("Trajectory needs one energy per sample time")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def actions(self) -> np.ndarray:
        """(samples x sites) I_j(t)"""
        return np.abs(self.amplitudes) ** 2

    @property
    def final(self) -> StateVector:
        return StateVector(self.box, self.amplitudes[-1])


def is_diagonal_key(key) -> bool:
    return key.is_resonant and len(site_view(key)) <= 1


def split_diagonal(H: HamPoly) -> Tuple[HamPoly, HamPoly]:
    """(terms with beta == gamma on a single site, everything else)"""
    return H.filter(is_diagonal_key), H.filter(lambda k: not is_diagonal_key(k))


class DiagonalFlow:
    """Exact flow of an action-only, site-diagonal Hamiltonian"""

    def __init__(self, H_diag: HamPoly, box: BoxSpec, zeta, eps: float):
        bad = [k for k in H_diag if not is_diagonal_key(k)]
        if bad:
            raise NotDiagonal(f"Key {bad[0]} is not a single-site action monomial")
        items = [(key, value) for key, value in H_diag.items() if key.support]
        self.box = box
        self.eps = eps
        self.zeta = zeta_array(zeta, box)
        self.site = np.array([box.index[key.support[0]] for key, _ in items], dtype=np.int64)
        self.a = np.array([key.alpha_total for key, _ in items], dtype=np.int64)
        self.b = np.array([sum(e for _, e in key.beta) for key, _ in items], dtype=np.int64)
        self.coeff = np.array([value.real for _, value in items], dtype=float)

    def frequencies(self, actions: np.ndarray) -> np.ndarray:
        """theta_j = dH/dI_j with J_j = (I_j - zeta_j) / eps"""
        if self.site.size == 0:
            return np.zeros(self.box.size)
        I = actions[self.site]
        J = (I - self.zeta[self.site]) / self.eps
        J_lower = np.where(self.a > 0, J ** np.maximum(self.a - 1, 0), 0.0)
        I_lower = np.where(self.b > 0, I ** np.maximum(self.b - 1, 0), 0.0)
        d_theta = self.coeff * (self.a * J_lower / self.eps * I ** self.b + self.b * J ** self.a * I_lower)
        return np.bincount(self.site, weights=d_theta, minlength=self.box.size)

    def apply(self, q: np.ndarray, dt: float) -> np.ndarray:
        theta = self.frequencies(np.abs(q) ** 2)
        return q * np.exp(-1j * theta * dt)


def diagonal_flow_exact(q: StateVector, H_diag: HamPoly, dt: float, zeta, eps: float) -> StateVector:
    return StateVector(q.box, DiagonalFlow(H_diag, q.box, zeta, eps).apply(q.amplitudes, dt))


def eom_rhs(H: HamPoly, q: StateVector, zeta, eps: float) -> StateVector:
    """q' = -i dH/dq̄"""
    _, grad = CompiledPoly(H, q.box).gradients(q.amplitudes, zeta_array(zeta, q.box), eps, want_dq=False)
    return StateVector(q.box, -1j * grad)


class _Field:
    def __init__(self, H: HamPoly, box: BoxSpec, zeta: np.ndarray, eps: float):
        self.poly = CompiledPoly(H, box)
        self.zeta = zeta
        self.eps = eps
        self.empty = H.is_zero()

    def __call__(self, q: np.ndarray) -> np.ndarray:
        _, grad = self.poly.gradients(q, self.zeta, self.eps, want_dq=False)
        return -1j * grad

    def rk4(self, q: np.ndarray, dt: float) -> np.ndarray:
        if self.empty:
            return q
        k1 = self(q)
        k2 = self(q + 0.5 * dt * k1)
        k3 = self(q + 0.5 * dt * k2)
        k4 = self(q + dt * k3)
        return q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(H: HamPoly, q0: StateVector, cfg: IntegratorConfig, zeta=None, eps: float = 1.0,
              backward: bool = False) -> Trajectory:
    box = q0.box
    z = zeta_array(zeta, box)
    energy = CompiledPoly(H, box)
    dt = -cfg.dt if backward else cfg.dt
    n_steps = cfg.n_steps

    def energy_of(q):
        return energy.value(q, z, eps).real

    e0 = energy_of(q0.amplitudes)
    if not np.isfinite(e0) or not np.all(np.isfinite(q0.amplitudes)):
        raise StepUnstable("Initial state has a non-finite energy", 0.0)
    scale = max(abs(e0), np.finfo(float).tiny)
    drift_limit = Config.ENERGY_DRIFT_PER_STEP * scale

    if cfg.scheme == "strang":
        H_diag, H_rest = split_diagonal(H)
        diag = DiagonalFlow(H_diag, box, z, eps)
        rest = _Field(H_rest, box, z, eps)
    else:
        rest = _Field(H, box, z, eps)

    times, samples, energies = [0.0], [q0.amplitudes.copy()], [e0]
    q = q0.amplitudes.copy()
    last_energy, last_step = e0, 0
    pending_half = False
    logger.info(f"Integrating {n_steps} steps of dt={dt:g} with {cfg.scheme} ({len(H)} terms)")

    for step in tqdm(range(1, n_steps + 1), desc="Integrating", disable=None, leave=False):
        if cfg.scheme == "strang":
            q = diag.apply(q, dt if pending_half else 0.5 * dt)
            q = rest.rk4(q, dt)
            pending_half = True
        else:
            q = rest.rk4(q, dt)

        if step % cfg.sample_every == 0 or step == n_steps:
            if pending_half:
                q = diag.apply(q, 0.5 * dt)
                pending_half = False
            t = step * dt
            e = energy_of(q)
            if not np.isfinite(e) or not np.all(np.isfinite(q)):
                raise StepUnstable("State diverged", t)
            if abs(e - last_energy) > drift_limit * (step - last_step):
                raise StepUnstable(f"Energy drift {abs(e - last_energy):.3e} over {step - last_step} steps", t)
            last_energy, last_step = e, step
            times.append(t)
            samples.append(q.copy())
            energies.append(e)

    return Trajectory(box, np.array(times), np.array(samples), np.array(energies))
