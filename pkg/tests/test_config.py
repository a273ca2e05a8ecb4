import argparse

import pytest

from conftest import load_stage_config
from moduls.processing.command_processor import CHSH_TERMS, COMMANDS, RunConfig
from moduls.result_writer import OUTPUT_FORMATS

STAGES = ("dev", "test", "prod")


@pytest.mark.parametrize("stage", STAGES)
def test_stage_config_structure(stage):
    cfg = load_stage_config(stage)

    simulation = cfg["simulation"]
    assert set(simulation["source"]) == {"alpha_mod", "alpha_phase", "beta_mod", "beta_phase"}
    assert set(simulation["wigner_basis"]) == {"a_mod", "a_phase", "b_mod", "b_phase"}
    assert "theta" in simulation["channel"]
    assert simulation["grid"] >= 2
    assert simulation["output_format"] in OUTPUT_FORMATS
    assert simulation["subtract"] in CHSH_TERMS

    validation = cfg["validation"]
    assert validation["seed"] >= 0
    assert validation["trials"] >= 1
    assert 0 < validation["threshold"] <= 1e-10

    logging_cfg = cfg["logging"]
    assert isinstance(logging_cfg["file_logging"], bool)
    assert logging_cfg["retention_days"] > 0


@pytest.mark.parametrize("stage", STAGES)
@pytest.mark.parametrize("command", COMMANDS)
def test_stage_config_yields_run_config(stage, command):
    args = argparse.Namespace(command=command, theta=0.3)
    run_config = RunConfig.from_sources(args, load_stage_config(stage))
    assert run_config.command == command
    assert run_config.channel is not None
    assert run_config.out == "-"


def test_default_source_is_balanced():
    run_config = RunConfig.from_sources(argparse.Namespace(command="simple"), load_stage_config("prod"))
    assert run_config.source.weights == pytest.approx((0.5, 0.5), abs=1e-12)
    assert run_config.channel is None
    assert run_config.grid == 181
