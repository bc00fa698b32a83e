"""
Coefficient bounds for the normal-form stages, kept in log space.

Every key n of Z_s + R_s must satisfy

    |coeff(n)| <= (eps/eta)^(1 + (|n|-2)/4) (6 d |n|)^(4 sigma |n| (|n|-4)) (1 + n+)^(sigma (|n| - 6 + |alpha|))

The middle factor overflows doubles from |n| = 10 on, hence logs throughout.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple

from config.errors import PropertyViolation
from hamiltonian.polynomial import HamPoly, MonomialKey

logger = logging.getLogger(__name__)


class BoundViolation(PropertyViolation):
    pass


class LedgerEntry(NamedTuple):
    key: MonomialKey
    actual: float
    log_theoretical: float

    @property
    def log_ratio(self) -> float:
        return math.log(self.actual) - self.log_theoretical


def log_stage_bound(key: MonomialKey, eps: float, eta: float, sigma: float, d: int) -> float:
    n = key.degree
    return ((1 + (n - 2) / 4) * math.log(eps / eta)
            + 4 * sigma * n * (n - 4) * math.log(6 * d * n)
            + sigma * (n - 6 + key.alpha_total) * math.log1p(key.n_plus))


def ledger_entries(P: HamPoly, eps: float, eta: float, sigma: float, d: int) -> List[LedgerEntry]:
    return [LedgerEntry(key, abs(value), log_stage_bound(key, eps, eta, sigma, d)) for key, value in P.items()]


@dataclass
class BoundLedger:
    """Per-stage summaries of actual / theoretical coefficient ratios"""
    eps: float
    eta: float
    sigma: float
    d: int
    stages: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        return max((stage["max_bound_ratio"] for stage in self.stages), default=0.0)

    def record(self, s: int, P: HamPoly, strict: bool = True) -> float:
        """Evaluate every key of P for stage s; raise BoundViolation on a ratio above 1"""
        entries = ledger_entries(P, self.eps, self.eta, self.sigma, self.d)
        worst = max(entries, key=lambda e: e.log_ratio, default=None)
        log_ratio = worst.log_ratio if worst else -math.inf
        ratio = math.exp(log_ratio) if log_ratio < 700 else math.inf
        self.stages.append({
            "s": s,
            "keys": len(entries),
            "max_bound_ratio": ratio,
            "log10_max_bound_ratio": log_ratio / math.log(10) if worst else None,
            "worst_key": [list(map(list, part)) for part in worst.key] if worst else None,
        })
        logger.info(f"Stage {s}: {len(entries)} keys, max actual/theoretical = {ratio:.3e}")
        if strict and log_ratio > 0:
            raise BoundViolation(f"Stage {s}: coefficient of {worst.key} is {worst.actual:.3e}, "
                                 f"above its bound by a factor {ratio:.3e}")
        return ratio

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps": self.eps,
            "eta": self.eta,
            "sigma": self.sigma,
            "d": self.d,
            "max_bound_ratio": self.max_ratio,
            "stages": self.stages,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoundLedger":
        return cls(data["eps"], data["eta"], data["sigma"], data["d"], list(data["stages"]))
