import logging

from moduls.parameters import MessageOutcome
from moduls.processing.command_processor import CommandProcessor
from moduls.result_writer import ResultTable
from moduls.simulation.channel import theta_grid
from moduls.simulation.friendliness import (
    ChshSpec,
    chsh_value,
    conditional_chsh_rows,
    extended_record_state,
    extended_state,
    sweep_chsh,
)

logger = logging.getLogger(__name__)

CHSH_COLUMNS = (
    "theta",
    "phi",
    "chsh_n0",
    "chsh_n1",
    "chsh_unconditioned",
    "chsh_no_record",
    "chsh_record",
    "p_n0",
    "violating_message",
)
SWEEP_CHSH_COLUMNS = ("theta", "phi", "chsh_n0", "chsh_n1", "chsh_unconditioned")


class ChshProcessor(CommandProcessor):
    """CHSH values at one channel setting, next to the no-record and record baselines."""

    def process(self) -> int:
        params = self.require_channel()
        spec = ChshSpec.from_key(self.config.subtract)
        logger.info(f"CHSH at {params.describe()} subtracting {spec.subtracted}")

        rows = dict(zip(MessageOutcome, conditional_chsh_rows(params, spec)))
        violating = [n for n, row in rows.items() if row.violates]
        table = ResultTable("chsh", CHSH_COLUMNS)
        table.add_row(
            params.theta,
            params.phi,
            rows[MessageOutcome.ZERO].value,
            rows[MessageOutcome.ONE].value,
            sum(row.message_probability * row.value for row in rows.values()),
            chsh_value(extended_state().density(), spec),
            chsh_value(extended_record_state().density(), spec),
            rows[MessageOutcome.ZERO].message_probability,
            str(int(violating[0])) if violating else "none",
        )
        return self.emit(table)


class SweepChshProcessor(CommandProcessor):
    """Conditional CHSH curves for both messages over a uniform theta grid on [0, pi]."""

    def process(self) -> int:
        spec = ChshSpec.from_key(self.config.subtract)
        rows = sweep_chsh(self.config.phi, theta_grid(self.config.grid), spec)
        table = ResultTable("sweep-chsh", SWEEP_CHSH_COLUMNS)
        # sweep_chsh yields (n=0, n=1) pairs per theta
        for zero, one in zip(rows[0::2], rows[1::2]):
            unconditioned = zero.message_probability * zero.value + one.message_probability * one.value
            table.add_row(zero.theta, zero.phi, zero.value, one.value, unconditioned)
        return self.emit(table)
