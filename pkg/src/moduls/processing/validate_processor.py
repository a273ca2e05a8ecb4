import logging

from moduls.oracle.validation import cross_validate
from moduls.processing.command_processor import EXIT_OK, EXIT_VALIDATION_FAILED, CommandProcessor

logger = logging.getLogger(__name__)


class ValidateProcessor(CommandProcessor):
    """Cross-validate every closed form and simulation result against the brute-force pipeline."""

    def process(self) -> int:
        threshold = self.config.threshold
        report = cross_validate(seed=self.config.seed, trials=self.config.trials)
        passed = report.passed(threshold)
        summary = (
            f"result={'passed' if passed else 'failed'} seed={report.seed} trials={report.trials} "
            f"threshold={threshold:.0e} max_deviation={report.max_deviation:.3e}"
        )
        document = {
            "seed": report.seed,
            "trials": report.trials,
            "threshold": threshold,
            "passed": passed,
            "max_deviation": report.max_deviation,
            "worst": [
                {"quantity": d.quantity, "trial": d.trial, "deviation": d.deviation, "config": d.config}
                for d in (report.worst[q] for q in sorted(report.worst))
            ],
        }
        self.writer.write_document("validate", document, report.lines() + [summary])

        if not passed:
            for failure in report.failures(threshold):
                logger.error(f"Validation failed: {failure.line()}")
            return EXIT_VALIDATION_FAILED
        logger.info(f"Validation passed, max deviation {report.max_deviation:.3e}")
        return EXIT_OK
