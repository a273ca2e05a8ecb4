import importlib
import math

import pytest

from moduls.processing.chsh_processor import ChshProcessor, SweepChshProcessor
from moduls.processing.command_processor import (
    CommandProcessor,
    InvariantInputError,
    RunConfig,
    UsageError,
)
from moduls.processing.simple_processor import SimpleProcessor, SweepSimpleProcessor
from moduls.processing.simulation_processing import SimulationRunner
from moduls.processing.validate_processor import ValidateProcessor
from moduls.qcore import QCoreError
from moduls.result_writer import OutputWriteError, ResultTable, ResultWriter


def make_config(test_config, *argv):
    main_module = importlib.import_module("main")
    return RunConfig.from_sources(main_module.parse_arguments(list(argv)), test_config)


class CapturingWriter(ResultWriter):
    def __init__(self):
        super().__init__()
        self.tables = []
        self.documents = []

    def write_table(self, table):
        self.tables.append(table)

    def write_document(self, name, document, lines):
        self.documents.append((name, document, lines))


def test_arguments_override_config(test_config):
    config = make_config(test_config, "sweep-chsh", "--phi", "0.5", "--grid", "7", "--subtract", "xx")
    assert config.phi == 0.5
    assert config.grid == 7
    assert config.subtract == "xx"
    assert config.trials == test_config["validation"]["trials"]


def test_config_values_fill_missing_flags(test_config):
    config = make_config(test_config, "simple")
    assert config.source.weights == pytest.approx((0.5, 0.5), abs=1e-12)
    assert config.output_format == "csv"
    assert config.channel is None


def test_missing_config_section(test_config):
    broken = {key: value for key, value in test_config.items() if key != "validation"}
    main_module = importlib.import_module("main")
    with pytest.raises(UsageError):
        RunConfig.from_sources(main_module.parse_arguments(["simple"]), broken)


@pytest.mark.parametrize(
    "argv, error",
    [
        (("simple", "--a-mod", "-1"), UsageError),
        (("simple", "--a-mod", "0.9", "--b-mod", "0.9"), InvariantInputError),
        (("simple", "--theta", "nan"), UsageError),
        (("sweep-chsh", "--grid", "0"), UsageError),
        (("validate", "--seed", "-3"), UsageError),
    ],
)
def test_invalid_settings(test_config, argv, error):
    with pytest.raises(error):
        make_config(test_config, *argv)


def test_grid_is_only_checked_for_sweeps(test_config):
    assert make_config(test_config, "simple", "--grid", "1").grid == 1


def test_runner_selects_processor(test_config):
    expected = {
        "simple": SimpleProcessor,
        "sweep-simple": SweepSimpleProcessor,
        "chsh": ChshProcessor,
        "sweep-chsh": SweepChshProcessor,
        "validate": ValidateProcessor,
    }
    for command, processor_class in expected.items():
        runner = SimulationRunner(make_config(test_config, command))
        assert type(runner.processor) is processor_class


def test_base_processor_is_abstract(test_config):
    with pytest.raises(NotImplementedError):
        CommandProcessor(make_config(test_config, "simple")).process()


def test_processor_errors_are_wrapped(test_config, mocker):
    mocker.patch("moduls.processing.simple_processor.collapse_probs", side_effect=QCoreError("broken"))
    runner = SimulationRunner(make_config(test_config, "simple"))
    with pytest.raises(RuntimeError):
        runner.run()


def test_output_errors_pass_through(test_config, tmp_path):
    runner = SimulationRunner(make_config(test_config, "simple", "--out", str(tmp_path / "missing" / "x.csv")))
    with pytest.raises(OutputWriteError):
        runner.run()


def test_chsh_requires_theta(test_config):
    runner = SimulationRunner(make_config(test_config, "chsh"))
    with pytest.raises(UsageError):
        runner.run()


def test_simple_processor_rows(test_config):
    writer = CapturingWriter()
    config = make_config(test_config, "simple", "--theta", "0.7853981633974483")
    assert SimpleProcessor(config, writer).process() == 0
    (table,) = writer.tables
    assert isinstance(table, ResultTable)
    rows = {(row[0], row[1], row[2]): row[3] for row in table.rows}
    assert rows[("p_wigner", "1", "")] == pytest.approx(1.0, abs=1e-12)
    assert rows[("p_conditional", "1", "0")] == pytest.approx(1.0, abs=1e-12)
    assert rows[("p_conditional", "perp", "1")] == pytest.approx(0.0, abs=1e-12)
    assert rows[("p_message", "", "1")] == pytest.approx(0.5, abs=1e-12)


def test_sweep_chsh_rows(test_config):
    writer = CapturingWriter()
    config = make_config(test_config, "sweep-chsh", "--grid", "5", "--phi", "0")
    SweepChshProcessor(config, writer).process()
    (table,) = writer.tables
    assert len(table.rows) == 5
    theta, phi, n0, n1, unconditioned = table.rows[1]
    assert n0 == pytest.approx(2 * 2 ** 0.5, abs=1e-12)
    assert n1 == pytest.approx(0.0, abs=1e-12)
    assert unconditioned == pytest.approx(2 ** 0.5, abs=1e-12)


def test_chsh_processor_subtract_choice(test_config):
    writer = CapturingWriter()
    config = make_config(test_config, "chsh", "--theta", "0.7853981633974483", "--subtract", "xx")
    ChshProcessor(config, writer).process()
    record = dict(zip(writer.tables[0].columns, writer.tables[0].rows[0]))
    assert record["chsh_no_record"] == pytest.approx(0.0, abs=1e-12)
    assert record["violating_message"] == "1"


def test_validate_processor_document(test_config):
    writer = CapturingWriter()
    config = make_config(test_config, "validate", "--trials", "2", "--seed", "5")
    assert ValidateProcessor(config, writer).process() == 0
    name, document, lines = writer.documents[0]
    assert name == "validate"
    assert document["passed"] is True
    assert lines[-1].startswith("result=passed seed=5 trials=2")


def test_channel_parameters_are_reported_canonically(test_config):
    writer = CapturingWriter()
    config = make_config(test_config, "chsh", "--theta", str(math.pi + 0.25), "--phi", "-1")
    processor = ChshProcessor(config, writer)
    params = processor.optional_channel()
    assert params.theta == pytest.approx(0.25, abs=1e-12)
    assert params.phi == pytest.approx(2 * math.pi - 1.0, abs=1e-12)
    processor.process()
    record = dict(zip(writer.tables[0].columns, writer.tables[0].rows[0]))
    assert record["theta"] == pytest.approx(0.25, abs=1e-12)
    assert record["phi"] == pytest.approx(2 * math.pi - 1.0, abs=1e-12)


def test_simple_without_channel_has_no_channel_parameters(test_config):
    assert SimpleProcessor(make_config(test_config, "simple"), CapturingWriter()).optional_channel() is None
