"""
Seeded cross-validation of the simulation modules against the brute-force pipeline.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from moduls.oracle.pipeline import (
    RecordMode,
    chsh_from_distributions,
    collapse_enumeration,
    extended_distributions,
    run_pipeline,
    simple_wf_steps,
)
from moduls.parameters import (
    ChannelParams,
    MessageOutcome,
    SourceAmplitudes,
    WignerBasis,
    random_channel_params,
    random_source,
    random_wigner_basis,
)
from moduls.qcore import OutcomeDistribution
from moduls.simulation import channel, friendliness, scenarios

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240611
DEFAULT_TRIALS = 1000
DEFAULT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Deviation:
    quantity: str
    trial: int
    deviation: float
    config: str

    def line(self) -> str:
        return f"quantity={self.quantity} trial={self.trial} deviation={self.deviation:.3e} config={self.config}"


@dataclass
class ValidationReport:
    """Worst deviation per compared quantity over all trials."""

    seed: int
    trials: int
    worst: Dict[str, Deviation] = field(default_factory=dict)

    def record(self, quantity: str, trial: int, deviation: float, config: str) -> None:
        current = self.worst.get(quantity)
        if current is None or deviation > current.deviation:
            self.worst[quantity] = Deviation(quantity, trial, float(deviation), config)

    @property
    def max_deviation(self) -> float:
        return max((entry.deviation for entry in self.worst.values()), default=0.0)

    def passed(self, threshold: float = DEFAULT_THRESHOLD) -> bool:
        return self.max_deviation < threshold

    def failures(self, threshold: float = DEFAULT_THRESHOLD) -> List[Deviation]:
        return [entry for entry in self.worst.values() if entry.deviation >= threshold]

    def lines(self) -> List[str]:
        return [self.worst[quantity].line() for quantity in sorted(self.worst)]


def _relabel_friend_tree(tree_joint: OutcomeDistribution) -> OutcomeDistribution:
    """Enumeration joint over (f, w) as a distribution over (w, j)."""
    return OutcomeDistribution(("w", "j"), {(w, f): p for (f, w), p in tree_joint.probabilities.items()})


def _validate_simple(report: ValidationReport, trial: int, src: SourceAmplitudes, wb: WignerBasis,
                     params: ChannelParams, config: str) -> None:
    no_record = run_pipeline(simple_wf_steps(src, wb))
    report.record("unitary_probs", trial, scenarios.unitary_probs(src, wb).max_abs_deviation(no_record), config)
    report.record("closed_form_unitary_probs", trial,
                  scenarios.closed_form_unitary_probs(src, wb).max_abs_deviation(no_record), config)

    tree = collapse_enumeration(src, wb)
    report.record("collapse_probs", trial, scenarios.collapse_probs(src, wb).max_abs_deviation(tree.marginal("w")), config)

    with_record = run_pipeline(simple_wf_steps(src, wb, RecordMode.WHICH_OUTCOME))
    report.record("record_joint_probs", trial,
                  scenarios.record_joint_probs(src, wb).max_abs_deviation(with_record), config)
    report.record("closed_form_record_joint_probs", trial,
                  scenarios.closed_form_record_joint_probs(src, wb).max_abs_deviation(with_record), config)
    report.record("effective_collapse", trial,
                  _relabel_friend_tree(tree.joint()).max_abs_deviation(with_record), config)

    trivial = run_pipeline(simple_wf_steps(src, wb, RecordMode.TRIVIAL))
    report.record("trivial_record_probs", trial,
                  scenarios.trivial_record_probs(src, wb).max_abs_deviation(trivial), config)

    with_channel = run_pipeline(simple_wf_steps(src, wb, RecordMode.WHICH_OUTCOME, params))
    report.record("joint_probs_wn", trial,
                  channel.joint_probs_wn(src, wb, params).max_abs_deviation(with_channel), config)
    report.record("closed_form_joint_probs_wn", trial,
                  channel.closed_form_joint_probs_wn(src, wb, params).max_abs_deviation(with_channel), config)
    report.record("message_sum_rule", trial,
                  tree.marginal("w").max_abs_deviation(with_channel.marginal("w")), config)
    report.record("completeness", trial, channel.completeness_deviation(channel.message_basis(params)), config)


def _validate_chsh(report: ValidationReport, trial: int, params: ChannelParams, config: str) -> None:
    distributions = extended_distributions(params)
    for n, row in zip(MessageOutcome, friendliness.conditional_chsh_rows(params)):
        expected = chsh_from_distributions(distributions, n=n)
        report.record("conditional_chsh", trial, abs(row.value - expected), config)
        report.record("closed_form_conditional_chsh", trial,
                      abs(friendliness.closed_form_conditional_chsh(n, params) - expected), config)
        p_n = distributions[("z", "z")].probability_of("n", n)
        report.record("message_probability", trial, abs(row.message_probability - p_n), config)


def cross_validate(seed: int = DEFAULT_SEED, trials: int = DEFAULT_TRIALS) -> ValidationReport:
    """Compare closed forms and module results with the pipeline on seeded random inputs.

    Args:
        seed: Seed of the numpy random generator; equal seeds give equal reports.
        trials: Number of random (source, Wigner basis, channel) triples.
    Returns:
        ValidationReport with the worst deviation of every compared quantity.
    Raises:
        ValueError: If trials < 1.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    report = ValidationReport(seed=seed, trials=trials)
    start_time = time.time()
    logger.info(f"Cross-validating {trials} trials with seed {seed}")

    for trial in range(trials):
        src = random_source(rng)
        wb = random_wigner_basis(rng)
        params = random_channel_params(rng)
        config = f"{src.describe()} {wb.describe()} {params.describe()}"
        _validate_simple(report, trial, src, wb, params, config)
        _validate_chsh(report, trial, params, config)
        if (trial + 1) % 100 == 0:
            logger.debug(f"{trial + 1}/{trials} trials, max deviation so far {report.max_deviation:.3e}")

    logger.info(f"Cross-validation finished in {time.time() - start_time:.2f} seconds, "
                f"max deviation {report.max_deviation:.3e}")
    return report
