"""
Numeric evaluation of HamPoly values and Wirtinger gradients on lattice states.

A polynomial is compiled once against a box into dense (terms x slots) arrays
of site indices and exponents; slot s of term t is one site of its support.
Powers are read from per-site tables, so 0**0 == 1 holds exactly.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from hamiltonian.bracket import site_view
from hamiltonian.polynomial import HamPoly
from lattice.geometry import BoxSpec, StateVector

logger = logging.getLogger(__name__)


def zeta_array(zeta, box: BoxSpec) -> np.ndarray:
    """Accept InnerParams, a plain array, or None (all zero)"""
    if zeta is None:
        return np.zeros(box.size)
    values = getattr(zeta, 'zeta', zeta)
    values = np.asarray(values, dtype=float)
    if values.shape != (box.size,):
        raise ValueError(f"zeta has shape {values.shape}, box needs ({box.size},)")
    return values


def _power_table(x: np.ndarray, max_exp: int) -> np.ndarray:
    table = np.ones((max_exp + 1,) + x.shape, dtype=x.dtype)
    for k in range(1, max_exp + 1):
        table[k] = table[k - 1] * x
    return table


def _excluded_products(f: np.ndarray) -> np.ndarray:
    """Row-wise product of every slot but the current one"""
    ones = np.ones((f.shape[0], 1), dtype=f.dtype)
    prefix = np.cumprod(np.hstack([ones, f[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, f[:, :0:-1]]), axis=1)[:, ::-1]
    return prefix * suffix


class CompiledPoly:
    def __init__(self, P: HamPoly, box: BoxSpec):
        items = P.items()
        self.box = box
        self.n_terms = len(items)
        slots = max((len(site_view(key)) for key, _ in items), default=1)
        self.coeffs = np.array([value for _, value in items], dtype=complex)
        self.idx = np.zeros((self.n_terms, slots), dtype=np.int64)
        self.a = np.zeros((self.n_terms, slots), dtype=np.int64)
        self.b = np.zeros_like(self.a)
        self.c = np.zeros_like(self.a)
        for t, (key, _) in enumerate(items):
            for s, (site, (ea, eb, ec)) in enumerate(sorted(site_view(key).items())):
                if site not in box.index:
                    raise ValueError(f"Term {key} leaves the box at site {site}")
                self.idx[t, s] = box.index[site]
                self.a[t, s], self.b[t, s], self.c[t, s] = ea, eb, ec
        self.has_actions = bool(self.a.any())
        self.max_exp = int(max(self.a.max(initial=0), self.b.max(initial=0), self.c.max(initial=0)))
        self._plain = None if self.has_actions else self._compile_plain_field()

    def _compile_plain_field(self):
        """Flat gather indices into the power tables and a sparse scatter onto sites, weighted by c"""
        n = self.box.size
        lin_q = (self.b * n + self.idx).ravel()
        lin_qb = (self.c * n + self.idx).ravel()
        lin_qb_lower = (np.maximum(self.c - 1, 0) * n + self.idx).ravel()
        flat_c = self.c.ravel()
        pos = np.flatnonzero(flat_c)
        scatter = sparse.csr_matrix((flat_c[pos].astype(complex), (self.idx.ravel()[pos], pos)),
                                    shape=(n, flat_c.size))
        return lin_q, lin_qb, lin_qb_lower, scatter

    def _plain_qbar_gradient(self, q: np.ndarray) -> np.ndarray:
        lin_q, lin_qb, lin_qb_lower, scatter = self._plain
        qpow = _power_table(q, self.max_exp).ravel()
        qbpow = np.conj(qpow)
        q_part = qpow.take(lin_q)
        f = (q_part * qbpow.take(lin_qb)).reshape(self.idx.shape)
        others = (self.coeffs[:, None] * _excluded_products(f)).ravel()
        return scatter @ (others * q_part * qbpow.take(lin_qb_lower))

    def _tables(self, q: np.ndarray, zeta: np.ndarray, eps: float):
        qb = np.conj(q)
        qpow = _power_table(q, self.max_exp)
        qbpow = _power_table(qb, self.max_exp)
        if self.has_actions:
            J = (np.abs(q) ** 2 - zeta) / eps
            Jpow = _power_table(J.astype(complex), self.max_exp)
        else:
            Jpow = None
        return qb, qpow, qbpow, Jpow

    def _slot_factors(self, qpow, qbpow, Jpow) -> np.ndarray:
        f = qpow[self.b, self.idx] * qbpow[self.c, self.idx]
        if Jpow is not None:
            f = f * Jpow[self.a, self.idx]
        return f

    def value(self, q: np.ndarray, zeta: np.ndarray, eps: float) -> complex:
        if self.n_terms == 0:
            return 0j
        _, qpow, qbpow, Jpow = self._tables(q, zeta, eps)
        f = self._slot_factors(qpow, qbpow, Jpow)
        return complex(np.sum(self.coeffs * np.prod(f, axis=1)))

    def gradients(self, q: np.ndarray, zeta: np.ndarray, eps: float,
                  want_dq: bool = True) -> Tuple[Optional[np.ndarray], np.ndarray]:
        """(dP/dq_j, dP/dq̄_j) for every site, with the J chain rule included"""
        n = self.box.size
        if self.n_terms == 0:
            return (np.zeros(n, dtype=complex) if want_dq else None), np.zeros(n, dtype=complex)
        if self._plain is not None and not want_dq:
            return None, self._plain_qbar_gradient(q)
        qb, qpow, qbpow, Jpow = self._tables(q, zeta, eps)
        idx, a, b, c = self.idx, self.a, self.b, self.c
        f = self._slot_factors(qpow, qbpow, Jpow)
        others = self.coeffs[:, None] * _excluded_products(f)

        qs, qbs = q[idx], qb[idx]
        q_part, qb_part = qpow[b, idx], qbpow[c, idx]
        d_qbar = c * q_part * qbpow[np.maximum(c - 1, 0), idx]
        d_q = b * qpow[np.maximum(b - 1, 0), idx] * qb_part if want_dq else None
        if Jpow is not None:
            J_part = Jpow[a, idx]
            J_lower = a * Jpow[np.maximum(a - 1, 0), idx] / eps
            d_qbar = d_qbar * J_part + J_lower * qs * q_part * qb_part
            if want_dq:
                d_q = d_q * J_part + J_lower * qbs * q_part * qb_part

        grad_qbar = self._scatter(others * d_qbar, n)
        grad_q = self._scatter(others * d_q, n) if want_dq else None
        return grad_q, grad_qbar

    def _scatter(self, contrib: np.ndarray, n: int) -> np.ndarray:
        flat_idx = self.idx.ravel()
        flat = contrib.ravel()
        return (np.bincount(flat_idx, weights=flat.real, minlength=n)
                + 1j * np.bincount(flat_idx, weights=flat.imag, minlength=n))


def evaluate(P: HamPoly, q: StateVector, zeta=None, eps: float = 1.0) -> complex:
    """Substitute J_j = eps^-1 (|q_j|^2 - zeta_j) and sum the terms"""
    return CompiledPoly(P, q.box).value(q.amplitudes, zeta_array(zeta, q.box), eps)


def wirtinger_gradient(P: HamPoly, q: StateVector, zeta=None, eps: float = 1.0) -> np.ndarray:
    """dP/dq̄_j per site"""
    _, grad = CompiledPoly(P, q.box).gradients(q.amplitudes, zeta_array(zeta, q.box), eps, want_dq=False)
    return grad


def numeric_bracket(H: HamPoly, G: HamPoly, q: StateVector, zeta=None, eps: float = 1.0) -> complex:
    """i sum_j (dH/dq_j dG/dq̄_j - dH/dq̄_j dG/dq_j) from the numeric gradients"""
    z = zeta_array(zeta, q.box)
    hq, hqb = CompiledPoly(H, q.box).gradients(q.amplitudes, z, eps)
    gq, gqb = CompiledPoly(G, q.box).gradients(q.amplitudes, z, eps)
    return complex(1j * np.sum(hq * gqb - hqb * gq))
