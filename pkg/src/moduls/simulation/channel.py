"""
Measure-and-prepare channel between the friend and Wigner.

The channel measures the record R in a message basis {|n>} parametrized by
(theta, phi) relative to the record basis {|r_i>}:

    |0> = cos(theta)|r0> + e^{i phi} sin(theta)|r1>
    |1> = e^{-i phi} sin(theta)|r0> - cos(theta)|r1>

theta = 0 reveals the friend's outcome (effective collapse), theta = pi/4 makes
both bases mutually unbiased (messages carry no outcome information).
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from moduls.parameters import ChannelParams, MessageOutcome, SourceAmplitudes, WignerBasis, WignerOutcome
from moduls.qcore import (
    ALGEBRAIC_TOL,
    DensityMatrix,
    EmptyInputError,
    KrausChannel,
    Operator,
    OutcomeDistribution,
    QCoreError,
    StateVector,
    apply_channel,
    born_probabilities,
    joint_projectors,
    projector,
)
from moduls.simulation.scenarios import LAYOUT_R, LAYOUT_SFR, record_state, wigner_projectors

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 181


class ChannelRegime(Enum):
    REVEALING = "revealing"
    UNBIASED = "unbiased"
    PARTIAL = "partial"


@dataclass(frozen=True, eq=False)
class MessageBasis:
    """Orthonormal message kets on R for one channel setting."""

    params: ChannelParams
    kets: Tuple[StateVector, StateVector]

    def __post_init__(self):
        kets = tuple(self.kets)
        if len(kets) != 2:
            raise QCoreError(f"A message basis has two kets, got {len(kets)}")
        for ket in kets:
            if ket.layout != LAYOUT_R:
                raise QCoreError(f"Message kets must live on {LAYOUT_R.labels}")
        if abs(kets[0].overlap(kets[1])) > ALGEBRAIC_TOL:
            raise QCoreError("Message kets are not orthogonal")
        object.__setattr__(self, "kets", kets)
        deviation = completeness_deviation(self)
        if deviation > ALGEBRAIC_TOL:
            raise QCoreError(f"Message basis completeness violated by {deviation:.3e}")

    def ket(self, n: int) -> StateVector:
        return self.kets[int(n)]

    def overlap(self, n: int, record: int) -> complex:
        """<n|r_record>."""
        return complex(np.conj(self.kets[int(n)].amplitudes[int(record)]))

    def projectors(self) -> Dict[MessageOutcome, Operator]:
        return {n: projector(self.kets[n]) for n in MessageOutcome}


def message_basis(params: ChannelParams) -> MessageBasis:
    cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
    phase = cmath.exp(1j * params.phi)
    zero = StateVector(LAYOUT_R, [cos_t, phase * sin_t])
    one = StateVector(LAYOUT_R, [phase.conjugate() * sin_t, -cos_t])
    return MessageBasis(params, (zero, one))


def completeness_deviation(basis: MessageBasis) -> float:
    """max_ij |sum_m <m|r_i><r_j|m> - delta_ij|."""
    identity_check = np.zeros((2, 2), dtype=np.complex128)
    for n in MessageOutcome:
        for i in range(2):
            for j in range(2):
                identity_check[i, j] += basis.overlap(n, i) * np.conj(basis.overlap(n, j))
    return float(np.max(np.abs(identity_check - np.eye(2))))


def dephasing_channel(basis: MessageBasis) -> KrausChannel:
    """C[sigma] = sum_m <m|sigma|m> |m><m|, Kraus set {|m><m|}."""
    return KrausChannel(tuple(projector(ket) for ket in basis.kets))


def classify_channel(params: ChannelParams, tol: float = ALGEBRAIC_TOL) -> ChannelRegime:
    if abs(math.sin(2 * params.theta)) <= tol:
        return ChannelRegime.REVEALING
    if abs(math.cos(2 * params.theta)) <= tol:
        return ChannelRegime.UNBIASED
    return ChannelRegime.PARTIAL


def recovers_unitary(params: ChannelParams, tol: float = ALGEBRAIC_TOL) -> bool:
    """One of the messages reproduces the no-record (unitary) table exactly."""
    return abs(abs(math.cos(params.phi) * math.sin(2 * params.theta)) - 1.0) <= tol


def post_channel_state(src: SourceAmplitudes, params: ChannelParams) -> DensityMatrix:
    """rho_SFR = (1 x C)|Psi^r><Psi^r|."""
    channel = dephasing_channel(message_basis(params))
    return apply_channel(record_state(src).density(), channel, on="R")


def joint_probs_wn(src: SourceAmplitudes, wb: WignerBasis, params: ChannelParams) -> OutcomeDistribution:
    """p(w, n) = Tr(|w><w| x |n><n| rho_SFR)."""
    rho = post_channel_state(src, params)
    projectors = joint_projectors([wigner_projectors(wb), message_basis(params).projectors()], LAYOUT_SFR)
    keys = list(projectors)
    probabilities = born_probabilities(rho, [projectors[key] for key in keys])
    return OutcomeDistribution(("w", "n"), dict(zip(keys, probabilities)))


def closed_form_joint_probs_wn(src: SourceAmplitudes, wb: WignerBasis, params: ChannelParams) -> OutcomeDistribution:
    """Expanded form of |sum_i alpha_i <w|i,i> <n|r_i>|^2."""
    p_alpha, p_beta = src.weights
    p_a, p_b = wb.weights
    cos_sq, sin_sq = math.cos(params.theta) ** 2, math.sin(params.theta) ** 2
    cross = math.sin(2 * params.theta) * (
        src.alpha * src.beta.conjugate() * wb.a.conjugate() * wb.b * cmath.exp(1j * params.phi)
    ).real
    return OutcomeDistribution(
        ("w", "n"),
        {
            (WignerOutcome.ONE, MessageOutcome.ZERO): p_alpha * p_a * cos_sq + p_beta * p_b * sin_sq + cross,
            (WignerOutcome.TWO, MessageOutcome.ZERO): p_alpha * p_b * cos_sq + p_beta * p_a * sin_sq - cross,
            (WignerOutcome.PERP, MessageOutcome.ZERO): 0.0,
            (WignerOutcome.ONE, MessageOutcome.ONE): p_alpha * p_a * sin_sq + p_beta * p_b * cos_sq - cross,
            (WignerOutcome.TWO, MessageOutcome.ONE): p_alpha * p_b * sin_sq + p_beta * p_a * cos_sq + cross,
            (WignerOutcome.PERP, MessageOutcome.ONE): 0.0,
        },
    )


@dataclass(frozen=True)
class PartialCollapseRow:
    theta: float
    phi: float
    p_n0: float
    p_n1: float
    p_w1_given_n0: float
    p_w2_given_n0: float
    p_perp_given_n0: float
    p_w1_given_n1: float
    p_w2_given_n1: float
    p_perp_given_n1: float


def theta_grid(size: int = DEFAULT_GRID_SIZE, stop: float = math.pi) -> List[float]:
    """Uniform grid on [0, stop] including both endpoints."""
    if size < 2:
        raise ValueError(f"A theta grid needs at least 2 points, got {size}")
    return [float(value) for value in np.linspace(0.0, stop, size)]


def partial_collapse_row(src: SourceAmplitudes, wb: WignerBasis, params: ChannelParams) -> PartialCollapseRow:
    joint = joint_probs_wn(src, wb, params)
    given = {n: joint.conditional("n", n) for n in MessageOutcome}
    return PartialCollapseRow(
        theta=params.theta,
        phi=params.phi,
        p_n0=joint.probability_of("n", MessageOutcome.ZERO),
        p_n1=joint.probability_of("n", MessageOutcome.ONE),
        p_w1_given_n0=given[MessageOutcome.ZERO][WignerOutcome.ONE],
        p_w2_given_n0=given[MessageOutcome.ZERO][WignerOutcome.TWO],
        p_perp_given_n0=given[MessageOutcome.ZERO][WignerOutcome.PERP],
        p_w1_given_n1=given[MessageOutcome.ONE][WignerOutcome.ONE],
        p_w2_given_n1=given[MessageOutcome.ONE][WignerOutcome.TWO],
        p_perp_given_n1=given[MessageOutcome.ONE][WignerOutcome.PERP],
    )


def sweep_partial_collapse(
    src: SourceAmplitudes,
    wb: WignerBasis,
    phi: float,
    theta_values: Sequence[float],
) -> List[PartialCollapseRow]:
    """Conditional probabilities p(w|n) along a theta grid at fixed phi, in grid order."""
    theta_values = list(theta_values)
    if not theta_values:
        raise EmptyInputError("sweep_partial_collapse() needs a non-empty theta grid")
    logger.info(f"Sweeping partial collapse over {len(theta_values)} theta values (phi={phi})")
    rows = []
    for theta in theta_values:
        rows.append(partial_collapse_row(src, wb, ChannelParams(theta, phi)))
        logger.debug(f"theta={theta:.6f}: p(w=1|n=0)={rows[-1].p_w1_given_n0:.12f}")
    return rows
