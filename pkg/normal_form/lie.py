"""
Truncated Lie series H o X_F^1 = sum_l {H, F}^(l) / l!.

Terms that leave the degree or spread cap are dropped at the bracket order
where they first appear and only their sup enters the remainder; their
descendants are never formed.
"""
import logging
from typing import NamedTuple

from hamiltonian.bracket import poisson_bracket
from hamiltonian.polynomial import HamPoly, truncate

logger = logging.getLogger(__name__)


class LieResult(NamedTuple):
    transformed: HamPoly
    remainder: float


def lie_transform(H: HamPoly, F: HamPoly, M_star: int, eps: float, cap_degree: int,
                  cap_spread: int) -> LieResult:
    if M_star < 1:
        raise ValueError(f"M_star must be >= 1, got {M_star}")
    if F.is_zero():
        return LieResult(H, 0.0)

    total, dropped = truncate(H, cap_degree, cap_spread)
    term = total
    for order in range(1, M_star + 1):
        term = poisson_bracket(term, F, eps).scale(1.0 / order)
        term, cut = truncate(term, cap_degree, cap_spread)
        dropped = max(dropped, cut)
        if term.is_zero():
            logger.debug(f"Lie series terminated at order {order}")
            return LieResult(total, dropped)
        total = total + term

    tail = poisson_bracket(term, F, eps).scale(1.0 / (M_star + 1)).max_abs()
    logger.debug(f"Lie series: {len(total)} terms, dropped sup {dropped:.3e}, tail {tail:.3e}")
    return LieResult(total, dropped + tail)
