#!/usr/bin/env python3
"""
Run configuration: defaults, type checks and range checks
"""
import sys
import os
# Add parent directory to path to import project modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from config.config import RunConfig
from config.errors import ConfigError


def _fields_of(data):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(data)
    assert info.value.exit_code == 2
    return info.value.fields


def test_defaults_are_valid():
    config = RunConfig.from_dict({})
    assert (config.d, config.L, config.scheme) == (1, 4, "strang")
    assert RunConfig.from_dict({"sigma": 3, "eps": 0.01, "M": None, "perturbation_scale": -1.0}).sigma == 3


def test_wrong_types_are_named():
    assert _fields_of({"sigma": "2"}) == ["sigma"]
    assert _fields_of({"L": 2.0, "eps": None}) == ["L", "eps"]
    assert _fields_of({"seed": True}) == ["seed"]
    assert _fields_of({"integrable": 1}) == ["integrable"]
    assert _fields_of({"scheme": 3, "resume": 4}) == ["scheme", "resume"]


def test_out_of_range_values_are_named():
    assert _fields_of({"eps": 1.0}) == ["eps"]
    assert _fields_of({"d": 0, "dt": 20.0, "T": 10.0}) == ["d", "dt"]
    assert _fields_of({"perturbation_scale": 1.5}) == ["perturbation_scale"]
    assert _fields_of({"trials": 10, "threads": 0}) == ["trials", "threads"]
    assert _fields_of({"sigma": float("nan")}) == ["sigma"]


def test_unknown_keys_and_overrides():
    assert _fields_of({"Sigma": 2.0}) == ["Sigma"]
    config = RunConfig.from_dict({"seed": 3}).with_overrides(seed=9, threads=None)
    assert config.seed == 9 and config.threads == 1
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(threads=0)


if __name__ == "__main__":
    test_defaults_are_valid()
    test_wrong_types_are_named()
    test_out_of_range_values_are_named()
    test_unknown_keys_and_overrides()
    print("Configuration tests passed!")
