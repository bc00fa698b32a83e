"""
JSON form of HamPoly: one record per term, sorted by canonical key,

    {"alpha": [[site, exp], ...], "beta": [...], "gamma": [...], "re": float, "im": float}

with each site an integer array of length d.
"""
import json
import logging
from typing import Any, Dict, List

from hamiltonian.polynomial import HamPoly, MonomialKey
from lattice.geometry import MultiIndex

logger = logging.getLogger(__name__)


def _index_to_json(index: MultiIndex) -> List[List[Any]]:
    return [[list(site), exponent] for site, exponent in index]


def _index_from_json(entries: List[List[Any]]) -> MultiIndex:
    return tuple(sorted((tuple(int(c) for c in site), int(exponent)) for site, exponent in entries))


def poly_to_records(P: HamPoly) -> List[Dict[str, Any]]:
    return [
        {
            "alpha": _index_to_json(key.alpha),
            "beta": _index_to_json(key.beta),
            "gamma": _index_to_json(key.gamma),
            "re": value.real,
            "im": value.imag,
        }
        for key, value in P.items()
    ]


def poly_from_records(records: List[Dict[str, Any]], dropped_mass: float = 0.0) -> HamPoly:
    terms = {}
    for record in records:
        key = MonomialKey(_index_from_json(record["alpha"]),
                          _index_from_json(record["beta"]),
                          _index_from_json(record["gamma"]))
        if key in terms:
            raise ValueError(f"Duplicate term {key} in serialized polynomial")
        terms[key] = complex(record["re"], record["im"])
    return HamPoly(terms, dropped_mass)


def dumps_poly(P: HamPoly) -> str:
    return json.dumps(poly_to_records(P))


def loads_poly(text: str) -> HamPoly:
    return poly_from_records(json.loads(text))
