import logging

from moduls.parameters import MessageOutcome
from moduls.processing.command_processor import CommandProcessor
from moduls.result_writer import ResultTable
from moduls.simulation.channel import joint_probs_wn, sweep_partial_collapse, theta_grid
from moduls.simulation.scenarios import WIGNER_OUTCOMES, collapse_probs, paradox_gap, unitary_probs

logger = logging.getLogger(__name__)

SIMPLE_COLUMNS = ("quantity", "w", "n", "value")
SWEEP_SIMPLE_COLUMNS = (
    "theta",
    "phi",
    "p_w1_given_n0",
    "p_w2_given_n0",
    "p_w1_given_n1",
    "p_w2_given_n1",
    "p_n0",
)


class SimpleProcessor(CommandProcessor):
    """Friend's and Wigner's predictions, plus the message-conditioned table when a channel is set."""

    def process(self) -> int:
        src, wb = self.config.source, self.config.wigner_basis
        logger.info(f"Simple scenario for {src.describe()} {wb.describe()}")
        table = ResultTable("simple", SIMPLE_COLUMNS)

        friend = collapse_probs(src, wb)
        wigner = unitary_probs(src, wb)
        for w in WIGNER_OUTCOMES:
            table.add_row("p_friend", w.label, "", friend[w])
        for w in WIGNER_OUTCOMES:
            table.add_row("p_wigner", w.label, "", wigner[w])
        table.add_row("paradox_gap", "", "", paradox_gap(src, wb))

        params = self.optional_channel()
        if params is not None:
            logger.info(f"Conditioning on messages with {params.describe()}")
            joint = joint_probs_wn(src, wb, params)
            for n in MessageOutcome:
                table.add_row("p_message", "", str(int(n)), joint.probability_of("n", n))
            for n in MessageOutcome:
                for w in WIGNER_OUTCOMES:
                    table.add_row("p_joint", w.label, str(int(n)), joint[(w, n)])
            for n in MessageOutcome:
                given = joint.conditional("n", n)
                for w in WIGNER_OUTCOMES:
                    table.add_row("p_conditional", w.label, str(int(n)), given[w])
        return self.emit(table)


class SweepSimpleProcessor(CommandProcessor):
    """Partial-collapse curves p(w|n) over a uniform theta grid on [0, pi]."""

    def process(self) -> int:
        table = ResultTable("sweep-simple", SWEEP_SIMPLE_COLUMNS)
        rows = sweep_partial_collapse(
            self.config.source, self.config.wigner_basis, self.config.phi, theta_grid(self.config.grid)
        )
        for row in rows:
            table.add_row(
                row.theta,
                row.phi,
                row.p_w1_given_n0,
                row.p_w2_given_n0,
                row.p_w1_given_n1,
                row.p_w2_given_n1,
                row.p_n0,
            )
        return self.emit(table)
