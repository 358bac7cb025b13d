"""Pytest configuration and shared fixtures for secrecy-region tests."""

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from secrecy_region.channel_model import ParallelChannel, Weights
from secrecy_region.config import SolverConfig


@pytest.fixture
def single_channel():
    """One subchannel in A: mu^2 = 1, nu^2 = 2, real prefactor."""
    return ParallelChannel.from_pairs([(1.0, 2.0)])


@pytest.fixture
def mixed_channel():
    """Two subchannels in A and one in A^c."""
    return ParallelChannel.from_pairs([(0.5, 2.0), (1.0, 1.6), (1.5, 0.8)])


@pytest.fixture
def a_empty_channel():
    """Receiver 2 is at least as good everywhere."""
    return ParallelChannel.from_pairs([(2.0, 1.0)])


@pytest.fixture
def unit_weights():
    """gamma0 = gamma1 = 1."""
    return Weights(1.0, 1.0)


@pytest.fixture
def solver_config():
    """Default solver tolerances."""
    return SolverConfig()


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Write a config document to a file in tmp_path."""

    def write(document: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write


@pytest.fixture
def region_document():
    """Config for the L=1 fixture channel."""
    return {
        "channel": {"subchannels": [{"mu_sq": 1.0, "nu_sq": 2.0}]},
        "P": 2.0,
        "ratios": [0.01, 0.1, 1.0, 1.5, 2.0, 3.0, 10.0, 100.0],
    }
