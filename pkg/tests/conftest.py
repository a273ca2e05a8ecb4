"""Shared pytest fixtures."""
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Base paths
ROOT_DIR = Path(__file__).resolve().parent.parent
SRC_DIR = ROOT_DIR / "src"
CONFIG_DIR = ROOT_DIR / "config"

# src/ must be importable while test modules are collected
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from moduls.parameters import (  # noqa: E402
    SourceAmplitudes,
    WignerBasis,
    random_channel_params,
    random_source,
    random_wigner_basis,
)

SQRT2 = math.sqrt(2.0)
TOL = 1e-12


def load_stage_config(stage: str) -> dict:
    with open(CONFIG_DIR / f"{stage}.json", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture(scope="session")
def prod_config():
    return load_stage_config("prod")


@pytest.fixture(scope="session")
def test_config():
    return load_stage_config("test")


@pytest.fixture()
def bell_source():
    return SourceAmplitudes.balanced()


@pytest.fixture()
def bell_basis():
    return WignerBasis.bell()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


@pytest.fixture()
def random_triples(rng):
    """Twenty seeded (source, Wigner basis, channel) triples."""
    return [(random_source(rng), random_wigner_basis(rng), random_channel_params(rng)) for _ in range(20)]


@pytest.fixture(autouse=True)
def isolated_log_dir(monkeypatch, tmp_path):
    """Keep file logs of CLI tests out of the repository."""
    monkeypatch.setenv("WFSIM_LOG_DIR", str(tmp_path / "logs"))


@pytest.fixture()
def reset_root_logger():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        handler.close()
    root.handlers.clear()
