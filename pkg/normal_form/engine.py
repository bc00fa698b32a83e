"""
Birkhoff normal form iteration for the rescaled lattice Hamiltonian.

Stage s holds H_s = D + 𝒥 + Z_s + R_s with Z_s action-dependent (beta = gamma)
and R_s of degree 2s+4 .. M. One step solves the homological equation for the
degree-(2s+4) part of R_s, Lie-transforms H_s with the generator and splits
the result again; after floor((M-4)/2) steps every nonresonant term up to
degree M has been removed.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

from config.errors import ConfigError, PropertyViolation
from hamiltonian.polynomial import HamPoly, split_resonant, truncate
from lattice.geometry import BoxSpec, l1_norm
from media.nonresonance import check_nonresonance
from media.sampling import FrequencyMap
from normal_form.homological import SmallDivisorViolation, solve_homological
from normal_form.ledger import BoundLedger
from normal_form.lie import lie_transform

logger = logging.getLogger(__name__)

HOMOLOGICAL_TOLERANCE = 1e-12
REMAINDER_EXPONENT = 0.24


class EpsTooLarge(PropertyViolation):
    pass


class MChoice(NamedTuple):
    M: int
    formula: float
    remainder_exponent: float


def choose_M(eps: float, sigma: float) -> MChoice:
    """M = ln(1/eps) / (100 sigma ln ln(1/eps)), rounded to even and clamped below at 6"""
    if not 0 < eps < math.exp(-math.e):
        raise EpsTooLarge(f"eps = {eps} must lie in (0, e^-e) for the choice of M")
    log_inv = math.log(1 / eps)
    formula = log_inv / (100 * sigma * math.log(log_inv))
    M = max(6, 2 * round(formula / 2))
    return MChoice(M, formula, REMAINDER_EXPONENT * M)


@dataclass(frozen=True)
class BnfConfig:
    eps: float
    eta: float
    sigma: float
    d: int
    M: int
    box: BoxSpec

    def __post_init__(self):
        if self.M < 6:
            raise ConfigError("The normal form needs M >= 6", ["M"])
        if self.box.d != self.d:
            raise ConfigError(f"Box dimension {self.box.d} does not match d = {self.d}", ["d"])

    @property
    def M_star(self) -> int:
        return self.M // 4

    @property
    def planned_steps(self) -> int:
        return (self.M - 4) // 2

    @property
    def cap_spread(self) -> int:
        return self.M // 4


@dataclass(frozen=True)
class BnfStage:
    s: int
    D: HamPoly
    J4: HamPoly
    Z: HamPoly
    R: HamPoly
    omega: FrequencyMap
    generators: Tuple[HamPoly, ...] = ()
    remainder_ledger: float = 0.0
    max_bound_ratio: float = 0.0
    history: Tuple[Dict[str, Any], ...] = field(default=())

    @property
    def hamiltonian(self) -> HamPoly:
        return self.D + self.J4 + self.Z + self.R


class BnfResult(NamedTuple):
    Z_final: HamPoly
    remainder_bound: float
    generators: List[HamPoly]
    report: Dict[str, Any]


def _split_stage(P: HamPoly) -> Tuple[HamPoly, HamPoly, HamPoly, HamPoly]:
    """(degree 2, degree 4, beta == gamma of degree >= 6, beta != gamma of degree >= 6)"""
    D = P.homogeneous_part(2)
    J4 = P.homogeneous_part(4)
    Z, R = split_resonant(P.filter(lambda k: k.degree >= 6))
    return D, J4, Z, R


def check_stage_structure(stage: BnfStage) -> None:
    bad_z = [k for k in stage.Z if not k.is_resonant]
    if bad_z:
        raise PropertyViolation(f"Stage {stage.s}: normal form holds the nonresonant key {bad_z[0]}")
    floor = 2 * stage.s + 4
    for key in stage.R:
        if key.degree < floor:
            raise PropertyViolation(f"Stage {stage.s}: remainder key {key} has degree below {floor}")
    for key in list(stage.Z) + list(stage.R):
        if 4 * key.spread > key.degree - 2:
            raise PropertyViolation(f"Stage {stage.s}: key {key} has spread {key.spread} above (|n|-2)/4")


def _history_entry(ledger: BoundLedger, stage: BnfStage, residual: float) -> Dict[str, Any]:
    entry = dict(ledger.stages[-1])
    entry.update({"keys_Z": len(stage.Z), "keys_R": len(stage.R), "homological_residual": residual,
                  "remainder_ledger": stage.remainder_ledger})
    return entry


def initial_stage(H1: HamPoly, omega: FrequencyMap, config: BnfConfig, ledger: BoundLedger) -> BnfStage:
    D, J4, Z, R = _split_stage(H1)
    others = H1.filter(lambda k: k.degree not in (2, 4) and k.degree < 6)
    if others:
        raise PropertyViolation(f"Hamiltonian has {len(others)} terms of odd degree or below 6 outside D and 𝒥")
    R, cut = truncate(R, config.M, config.cap_spread)
    Z, cut_z = truncate(Z, config.M, config.cap_spread)
    stage = BnfStage(1, D, J4, Z, R, omega, remainder_ledger=max(cut, cut_z))
    check_stage_structure(stage)
    ratio = ledger.record(1, Z + R)
    entry = _history_entry(ledger, stage, 0.0)
    return replace(stage, max_bound_ratio=ratio, history=(entry,))


def bnf_step(stage: BnfStage, config: BnfConfig, ledger: Optional[BoundLedger] = None) -> BnfStage:
    s = stage.s
    if s > config.planned_steps:
        raise ValueError(f"Step {s} exceeds the {config.planned_steps} planned steps for M = {config.M}")
    ledger = ledger or BoundLedger(config.eps, config.eta, config.sigma, config.d)
    target = 2 * s + 4
    R_target = stage.R.homogeneous_part(target)
    logger.info(f"Step {s}: removing {len(R_target)} nonresonant terms of degree {target}")

    if R_target.is_zero():
        F = HamPoly.zero()
        D, J4, Z, R = stage.D, stage.J4, stage.Z, stage.R
        remainder, residual = 0.0, 0.0
    else:
        F = solve_homological(R_target, stage.omega, config.eta, config.M, config.sigma)
        result = lie_transform(stage.hamiltonian, F, config.M_star, config.eps, config.M, config.cap_spread)
        D, J4, Z, R = _split_stage(result.transformed)
        leftover = R.homogeneous_part(target)
        residual = leftover.max_abs()
        if residual >= HOMOLOGICAL_TOLERANCE:
            raise PropertyViolation(f"Step {s}: degree-{target} nonresonant terms survive with |coeff| {residual:.3e}")
        R = R.filter(lambda k: k.degree != target)
        remainder = result.remainder + residual

    next_stage = BnfStage(s + 1, D, J4, Z, R, stage.omega,
                          generators=stage.generators + (F,),
                          remainder_ledger=stage.remainder_ledger + remainder)
    check_stage_structure(next_stage)
    ratio = ledger.record(s + 1, Z + R)
    entry = _history_entry(ledger, next_stage, residual)
    return replace(next_stage, max_bound_ratio=max(stage.max_bound_ratio, ratio),
                   history=stage.history + (entry,))


def run_bnf(H1: HamPoly, omega: FrequencyMap, config: BnfConfig, start: Optional[BnfStage] = None,
            on_stage: Optional[Callable[[BnfStage], None]] = None, verify_nonresonance: bool = True) -> BnfResult:
    """
    Iterate bnf_step from s = 1 (or from a resumed stage) to (M-4)/2.

    ``on_stage`` is called with every completed stage, the initial one included.
    """
    ledger = BoundLedger(config.eps, config.eta, config.sigma, config.d)
    if verify_nonresonance:
        report = check_nonresonance(omega, config.eta, config.M, config.sigma, config.box)
        if not report.passed:
            raise SmallDivisorViolation(f"omega is not ({config.eta}, {config.M})-nonresonant: "
                                        f"{len(report.violations)} violations, first k = {report.violations[0].k}")

    if start is None:
        stage = initial_stage(H1, omega, config, ledger)
        if on_stage:
            on_stage(stage)
    else:
        stage = start
        ledger.stages.extend(dict(h) for h in stage.history)
        logger.info(f"Resuming the normal form at stage {stage.s}")

    while stage.s <= config.planned_steps:
        stage = bnf_step(stage, config, ledger)
        if on_stage:
            on_stage(stage)

    Z_final = stage.J4 + stage.Z
    remainder_bound = stage.remainder_ledger + stage.R.max_abs()
    report = {
        "stages": list(stage.history),
        "max_bound_ratio": stage.max_bound_ratio,
        "remainder_bound": remainder_bound,
        "log10_remainder_target": REMAINDER_EXPONENT * config.M * math.log10(config.eps),
        "M": config.M,
        "M_star": config.M_star,
        "steps": config.planned_steps,
    }
    logger.info(f"Normal form done: {len(Z_final)} normal-form terms, remainder {remainder_bound:.3e}, "
                f"max bound ratio {stage.max_bound_ratio:.3e}")
    return BnfResult(Z_final, remainder_bound, list(stage.generators), report)


def theorem_time_scales(eps: float, sigma: float) -> Dict[str, Optional[float]]:
    """log10 of the stability horizons exp{|ln eps|^2 / (10^4 sigma ln ln 1/eps)} and eps^-3 2^sigma"""
    log_inv = math.log(1 / eps)
    nekhoroshev = None
    if log_inv > 1:
        nekhoroshev = log_inv ** 2 / (1e4 * sigma * math.log(log_inv)) / math.log(10)
    return {
        "log10_normal_form_time": nekhoroshev,
        "log10_derivative_bound_time": -3 * math.log10(eps) + sigma * math.log10(2),
    }


def iterated_remainder_bound(eps: float, M: int, sigma: float, d: int, site) -> float:
    """log10 of eps^(0.24 M) (6 d M)^(4 sigma M^2) (1+|j|_1)^(-6 sigma)"""
    return (REMAINDER_EXPONENT * M * math.log10(eps)
            + 4 * sigma * M ** 2 * math.log10(6 * d * M)
            - 6 * sigma * math.log10(1 + l1_norm(site)))
