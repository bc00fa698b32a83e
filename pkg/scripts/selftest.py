import sys
import os

# Add parent directory to path to allow imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

import json
from typing import Any, Callable, Dict, List

import numpy as np

from config.config import Config
from hamiltonian.bracket import bracket_bound_margin, bracket_law_violations, poisson_bracket
from hamiltonian.model import quadratic_part
from hamiltonian.numeric import evaluate, numeric_bracket
from hamiltonian.polynomial import split_resonant, truncate
from hamiltonian.random_poly import random_homogeneous_pair, random_poly, random_state, random_zeta
from lattice.geometry import BoxSpec
from media.sampling import frequencies, sample_inner, sample_media
from normal_form.homological import homological_residual, solve_homological
from scripts.output import to_jsonable
import logging

logger = logging.getLogger(__name__)

SELFTEST_SEED = 2024
ALGEBRA_EPS = 0.5
ORACLE_RTOL = 1e-9

Suite = Callable[[np.random.Generator, BoxSpec, int], Dict[str, Any]]


def _result(checked: int, failures: List[str]) -> Dict[str, Any]:
    return {"passed": not failures, "checked": checked, "failures": len(failures),
            "first_failure": failures[0] if failures else None}


def suite_antisymmetry(rng, box, qq_sign):
    failures = []
    pairs = 30
    for i in range(pairs):
        H = random_poly(rng, box, max_degree=8, n_terms=4)
        G = random_poly(rng, box, max_degree=8, n_terms=4)
        HG = poisson_bracket(H, G, ALGEBRA_EPS, _qq_sign=qq_sign)
        GH = poisson_bracket(G, H, ALGEBRA_EPS, _qq_sign=qq_sign)
        residual = (HG + GH).max_abs()
        if residual > 1e-12 * max(1.0, HG.max_abs()):
            failures.append(f"pair {i}: |{{H,G}} + {{G,H}}| = {residual:.3e}")
    return _result(pairs, failures)


def suite_jacobi(rng, box, qq_sign):
    failures = []
    triples = 10
    for i in range(triples):
        F, G, H = (random_poly(rng, box, max_degree=6, n_terms=3) for _ in range(3))

        def br(A, B):
            return poisson_bracket(A, B, ALGEBRA_EPS, _qq_sign=qq_sign)

        parts = [br(br(F, G), H), br(br(G, H), F), br(br(H, F), G)]
        scale = max(1.0, *(p.max_abs() for p in parts))
        residual = (parts[0] + parts[1] + parts[2]).max_abs()
        if residual > 1e-9 * scale:
            failures.append(f"triple {i}: Jacobi residual {residual:.3e} at scale {scale:.3e}")
    return _result(triples, failures)


def suite_wirtinger_oracle(rng, box, qq_sign):
    failures = []
    pairs, states = 10, 10
    for i in range(pairs):
        H = random_poly(rng, box, max_degree=8, n_terms=4)
        G = random_poly(rng, box, max_degree=8, n_terms=4)
        HG = poisson_bracket(H, G, ALGEBRA_EPS, _qq_sign=qq_sign)
        for _ in range(states):
            q = random_state(rng, box, scale=0.7)
            zeta = random_zeta(rng, box)
            symbolic = evaluate(HG, q, zeta, ALGEBRA_EPS)
            numeric = numeric_bracket(H, G, q, zeta, ALGEBRA_EPS)
            if abs(symbolic - numeric) > ORACLE_RTOL * max(1.0, abs(numeric)):
                failures.append(f"pair {i}: symbolic {symbolic:.6e} vs numeric {numeric:.6e}")
                break
    return _result(pairs * states, failures)


def _homogeneous_pairs(rng, box, count):
    for _ in range(count):
        degrees = (2 * int(rng.integers(1, 5)), 2 * int(rng.integers(1, 5)))
        yield random_homogeneous_pair(rng, box, degrees)


def suite_bracket_bound(rng, box, qq_sign):
    failures = []
    count = 200
    for H, G in _homogeneous_pairs(rng, box, count):
        for margin in bracket_bound_margin(H, G, ALGEBRA_EPS):
            if margin.ratio > 1:
                failures.append(f"{margin.mu} x {margin.m} -> {margin.n}: ratio {margin.ratio:.3f}")
    return _result(count, failures)


def _law_suite(laws):
    def suite(rng, box, qq_sign):
        failures = []
        count = 200
        for H, G in _homogeneous_pairs(rng, box, count):
            for v in bracket_law_violations(H, G, ALGEBRA_EPS, box.d):
                if v.law in laws:
                    failures.append(f"{v.law}: {v.mu} x {v.m} -> {v.n}")
        return _result(count, failures)
    return suite


def suite_homological_identity(rng, box, qq_sign):
    failures = []
    count = 10
    eps = 1e-3
    seed = int(rng.integers(2 ** 32))
    omega = frequencies(sample_media(seed, box), sample_inner(seed, box, 2.0), eps)
    D = quadratic_part(omega.omega, box)
    for i in range(count):
        _, R = split_resonant(random_poly(rng, box, max_degree=6, n_terms=5, with_J=False, min_degree=6))
        if not R:
            continue
        F = solve_homological(R, omega, eta=1e-8, M=8, sigma=2.0)
        residual = homological_residual(D, F, R, eps)
        if residual > 1e-12 * max(1.0, R.max_abs()):
            failures.append(f"sample {i}: residual {residual:.3e}")
    return _result(count, failures)


def suite_split_partition(rng, box, qq_sign):
    failures = []
    count = 50
    for i in range(count):
        P = random_poly(rng, box, max_degree=10, n_terms=8)
        Z, R = split_resonant(P)
        if Z + R != P or set(Z) & set(R) or not all(k.is_resonant for k in Z):
            failures.append(f"sample {i}: resonant split is not a partition")
            continue
        kept, ledger = truncate(P, 6)
        dropped = P - kept
        if any(k.degree > 6 for k in kept) or any(k.degree <= 6 for k in dropped):
            failures.append(f"sample {i}: degree truncation misplaced a term")
        elif abs(ledger - dropped.max_abs()) > 1e-15:
            failures.append(f"sample {i}: truncation ledger {ledger:.3e} != {dropped.max_abs():.3e}")
    return _result(count, failures)


SUITES: List[tuple] = [
    ("antisymmetry", suite_antisymmetry),
    ("jacobi", suite_jacobi),
    ("wirtinger_oracle", suite_wirtinger_oracle),
    ("bracket_bound", suite_bracket_bound),
    ("degree_law", _law_suite({"degree"})),
    ("spread_law", _law_suite({"spread", "spread_envelope"})),
    ("radius_law", _law_suite({"radius"})),
    ("homological_identity", suite_homological_identity),
    ("split_partition", suite_split_partition),
]


def run_suites(qq_sign: int = -1, seed: int = SELFTEST_SEED) -> Dict[str, Any]:
    box = BoxSpec(1, 3)
    results = []
    for name, suite in SUITES:
        rng = np.random.default_rng([seed, len(results)])
        outcome = suite(rng, box, qq_sign)
        outcome["name"] = name
        level = logging.INFO if outcome["passed"] else logging.ERROR
        logger.log(level, f"{name}: {'pass' if outcome['passed'] else 'FAIL'} ({outcome['checked']} cases)")
        results.append(outcome)
    first = next((r["name"] for r in results if not r["passed"]), None)
    return {"passed": first is None, "first_failure": first, "suites": results}


def run(corrupt_bracket: bool = False) -> int:
    """Algebra property suites; JSON summary on stdout, 0 iff every suite passes"""
    if corrupt_bracket:
        logger.warning("Running with a corrupted bracket sign")
    summary = run_suites(qq_sign=+1 if corrupt_bracket else -1)
    print(json.dumps(to_jsonable(summary), indent=2))
    if summary["first_failure"]:
        logger.error(f"Property suite failed: {summary['first_failure']}")
        return 1
    return 0


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(run())
