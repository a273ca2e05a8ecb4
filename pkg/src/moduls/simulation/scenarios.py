"""
Simple Wigner's friend experiment: the friend measures S in the computational
basis and stores the result in her memory F; Wigner measures S x F in the basis
given by a WignerBasis.

Friend (collapse) and Wigner (unitary) predictions, with and without a
which-outcome record R, are computed on explicit states through qcore.
Closed forms are kept next to them as secondary validators.
"""

import functools
import logging
from types import MappingProxyType
from typing import Dict, Mapping

import numpy as np

from moduls.parameters import FriendOutcome, SourceAmplitudes, WignerBasis, WignerOutcome
from moduls.qcore import (
    DensityMatrix,
    Operator,
    OutcomeDistribution,
    SpaceLayout,
    StateVector,
    basis_state,
    born_probabilities,
    identity,
    joint_projectors,
    projector,
    tensor,
)

logger = logging.getLogger(__name__)

LAYOUT_SF = SpaceLayout.of(("S", 2), ("F", 2))
LAYOUT_R = SpaceLayout.of(("R", 2))
LAYOUT_SFR = LAYOUT_SF.concat(LAYOUT_R)
# One-dimensional record: "I saw a definite outcome"
LAYOUT_TRIVIAL_R = SpaceLayout.of(("R", 1))

WIGNER_OUTCOMES = (WignerOutcome.ONE, WignerOutcome.TWO, WignerOutcome.PERP)


def _sf_vector(coefficient_00: complex, coefficient_11: complex) -> np.ndarray:
    vector = np.zeros(LAYOUT_SF.total_dim, dtype=np.complex128)
    vector[0] = coefficient_00
    vector[3] = coefficient_11
    return vector


def wigner_ket(wb: WignerBasis, outcome: WignerOutcome) -> StateVector:
    return StateVector(LAYOUT_SF, _sf_vector(*wb.ket_coefficients(outcome)))


def wigner_projectors(wb: WignerBasis) -> Dict[WignerOutcome, Operator]:
    """Wigner's measurement completed by the projector on the complement of span{|0,0>, |1,1>}."""
    one = projector(wigner_ket(wb, WignerOutcome.ONE))
    two = projector(wigner_ket(wb, WignerOutcome.TWO))
    perp = Operator(LAYOUT_SF, identity(LAYOUT_SF).entries - one.entries - two.entries, hermitian=True)
    return {WignerOutcome.ONE: one, WignerOutcome.TWO: two, WignerOutcome.PERP: perp}


def record_ket(outcome: int) -> StateVector:
    return basis_state(LAYOUT_R, (int(outcome),))


@functools.lru_cache(maxsize=None)
def record_projectors() -> Mapping[FriendOutcome, Operator]:
    return MappingProxyType({outcome: projector(record_ket(outcome)) for outcome in FriendOutcome})


def _distribution(variables, projector_table: Dict, rho: DensityMatrix) -> OutcomeDistribution:
    keys = list(projector_table)
    probabilities = born_probabilities(rho, [projector_table[key] for key in keys])
    return OutcomeDistribution(variables, dict(zip(keys, probabilities)))


def friend_isometry(src: SourceAmplitudes) -> StateVector:
    """|Phi>_SF = alpha|0,0> + beta|1,1>, the friend's measurement written unitarily."""
    return StateVector(LAYOUT_SF, _sf_vector(src.alpha, src.beta))


def collapse_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    """Friend's prediction for Wigner's result, using collapse dynamics."""
    p_alpha, p_beta = src.weights
    p_a, p_b = wb.weights
    return OutcomeDistribution(
        ("w",),
        {
            WignerOutcome.ONE: p_alpha * p_a + p_beta * p_b,
            WignerOutcome.TWO: p_beta * p_a + p_alpha * p_b,
            WignerOutcome.PERP: 0.0,
        },
    )


def unitary_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    """Wigner's prediction p(w) = |<w|Phi>|^2 without any record."""
    rho = friend_isometry(src).density()
    return _distribution(("w",), {(w,): p for w, p in wigner_projectors(wb).items()}, rho)


def closed_form_unitary_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    alpha, beta = src.amplitudes
    a, b = wb.a, wb.b
    return OutcomeDistribution(
        ("w",),
        {
            WignerOutcome.ONE: abs(alpha * a.conjugate() + beta * b.conjugate()) ** 2,
            WignerOutcome.TWO: abs(beta * a - alpha * b) ** 2,
            WignerOutcome.PERP: 0.0,
        },
    )


def record_state(src: SourceAmplitudes) -> StateVector:
    """|Psi^r> = alpha|0,0>|r0> + beta|1,1>|r1> on S x F x R."""
    branch_zero = tensor([basis_state(LAYOUT_SF, (0, 0)), record_ket(0)]).amplitudes
    branch_one = tensor([basis_state(LAYOUT_SF, (1, 1)), record_ket(1)]).amplitudes
    return StateVector(LAYOUT_SFR, src.alpha * branch_zero + src.beta * branch_one)


def record_joint_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    """p(w, j) = Tr(|w><w| x |r_j><r_j| |Psi^r><Psi^r|)."""
    projectors = joint_projectors([wigner_projectors(wb), record_projectors()], LAYOUT_SFR)
    return _distribution(("w", "j"), projectors, record_state(src).density())


def closed_form_record_joint_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    """Which-outcome table p(w|j) times p(j)."""
    p_record = dict(zip(FriendOutcome, src.weights))
    p_a, p_b = wb.weights
    given = {
        FriendOutcome.ZERO: {WignerOutcome.ONE: p_a, WignerOutcome.TWO: p_b, WignerOutcome.PERP: 0.0},
        FriendOutcome.ONE: {WignerOutcome.ONE: p_b, WignerOutcome.TWO: p_a, WignerOutcome.PERP: 0.0},
    }
    return OutcomeDistribution(
        ("w", "j"),
        {(w, j): p_record[j] * given[j][w] for j in FriendOutcome for w in WIGNER_OUTCOMES},
    )


def trivial_record_state(src: SourceAmplitudes) -> StateVector:
    """(alpha|0,0> + beta|1,1>)|r'> with a one-dimensional record."""
    return tensor([friend_isometry(src), basis_state(LAYOUT_TRIVIAL_R, (0,))])


def trivial_record_probs(src: SourceAmplitudes, wb: WignerBasis) -> OutcomeDistribution:
    """Wigner's prediction when the record factors out; equals unitary_probs."""
    layout = LAYOUT_SF.concat(LAYOUT_TRIVIAL_R)
    projectors = joint_projectors([wigner_projectors(wb)], layout)
    return _distribution(("w",), projectors, trivial_record_state(src).density())


def paradox_gap(src: SourceAmplitudes, wb: WignerBasis) -> float:
    """Largest disagreement between the friend's and Wigner's predictions."""
    gap = collapse_probs(src, wb).max_abs_deviation(unitary_probs(src, wb))
    logger.debug(f"Paradox gap for {src.describe()} {wb.describe()}: {gap:.12f}")
    return gap
