"""
Brute-force reference computations.

A pipeline is a list of steps (prepare, isometry, channel, measure) applied to
an explicit density matrix. Every ket and projector used here is built from
computational basis vectors through qcore, never from the simulation modules,
so results can be compared against those modules as an independent route.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from moduls.parameters import ChannelParams, FriendOutcome, MessageOutcome, SourceAmplitudes, WignerBasis, WignerOutcome
from moduls.qcore import (
    ALGEBRAIC_TOL,
    DensityMatrix,
    KrausChannel,
    Operator,
    OutcomeDistribution,
    QCoreError,
    SpaceLayout,
    StateVector,
    apply_channel,
    basis_state,
    born_probabilities,
    embed,
    identity,
    joint_projectors,
    measure,
    projector,
    tensor,
)

logger = logging.getLogger(__name__)

DEFAULT_SIGN_PATTERN = (("z", "z", 1), ("x", "z", 1), ("z", "x", -1), ("x", "x", 1))


class PipelineError(QCoreError):
    """A step does not type-check against the state it is applied to."""


class StepKind(Enum):
    PREPARE = "prepare"
    ISOMETRY = "isometry"
    CHANNEL = "channel"
    MEASURE = "measure"


class RecordMode(Enum):
    NONE = "none"
    WHICH_OUTCOME = "which-outcome"
    TRIVIAL = "trivial"


@dataclass(frozen=True, eq=False)
class PipelineStep:
    kind: StepKind
    payload: object
    target: Optional[str] = None
    name: Optional[str] = None

    @classmethod
    def prepare(cls, state) -> "PipelineStep":
        """Append a fresh system; the first step creates the state."""
        if isinstance(state, StateVector):
            state = state.density()
        if not isinstance(state, DensityMatrix):
            raise PipelineError(f"prepare() needs a StateVector or DensityMatrix, got {type(state).__name__}")
        return cls(StepKind.PREPARE, state)

    @classmethod
    def isometry(cls, unitary: Operator) -> "PipelineStep":
        entries = unitary.entries
        if np.max(np.abs(entries.conj().T @ entries - np.eye(entries.shape[0]))) > ALGEBRAIC_TOL:
            raise PipelineError(f"Isometry on {unitary.layout.labels} is not unitary")
        return cls(StepKind.ISOMETRY, unitary)

    @classmethod
    def channel(cls, channel: KrausChannel, on: str) -> "PipelineStep":
        return cls(StepKind.CHANNEL, channel, target=on)

    @classmethod
    def measure(cls, name: str, projectors: Mapping[Hashable, Operator]) -> "PipelineStep":
        if not projectors:
            raise PipelineError(f"Measurement '{name}' has no projectors")
        layouts = {proj.layout for proj in projectors.values()}
        if len(layouts) != 1:
            raise PipelineError(f"Projectors of measurement '{name}' act on different factors")
        return cls(StepKind.MEASURE, MappingProxyType(dict(projectors)), name=name)

    @property
    def labels(self) -> Tuple[str, ...]:
        if self.kind is StepKind.MEASURE:
            return next(iter(self.payload.values())).layout.labels
        if self.kind is StepKind.CHANNEL:
            return (self.target,)
        return self.payload.layout.labels


Branch = Tuple[Tuple[Hashable, ...], float, Optional[DensityMatrix]]


def _evolve(rho: Optional[DensityMatrix], step: PipelineStep) -> DensityMatrix:
    if step.kind is StepKind.PREPARE:
        return step.payload if rho is None else tensor([rho, step.payload])
    if rho is None:
        raise PipelineError(f"{step.kind.value} step before any prepare step")
    if step.kind is StepKind.ISOMETRY:
        unitary = embed(step.payload, rho.layout).entries
        return DensityMatrix(rho.layout, unitary @ rho.entries @ unitary.conj().T)
    return apply_channel(rho, step.payload, on=step.target)


def _measure_group(branches: List[Branch], group: Sequence[PipelineStep], final: bool) -> List[Branch]:
    seen: Dict[str, str] = {}
    for step in group:
        for label in step.labels:
            if label in seen:
                raise PipelineError(f"Measurements '{seen[label]}' and '{step.name}' both act on factor '{label}'")
            seen[label] = step.name

    measured: List[Branch] = []
    for outcome, weight, rho in branches:
        if rho is None:
            raise PipelineError("Measurement before any prepare step")
        projectors = joint_projectors([step.payload for step in group], rho.layout)
        keys = list(projectors)
        if final:
            probabilities = born_probabilities(rho, [projectors[key] for key in keys])
            measured.extend((outcome + key, weight * p, None) for key, p in zip(keys, probabilities))
            continue
        for key, (p, post) in zip(keys, measure(rho, [projectors[key] for key in keys])):
            # Branches below ALGEBRAIC_TOL carry no post-state and are dropped
            if post is not None:
                measured.append((outcome + key, weight * p, post))
    return measured


def run_pipeline(steps: Sequence[PipelineStep]) -> OutcomeDistribution:
    """Joint distribution of all declared measurement outcomes, in step order.

    Consecutive measurements on disjoint factors are evaluated as one joint
    projective measurement; post-measurement states are only formed when
    further steps follow.

    Raises:
        PipelineError: Malformed step list or a step that does not fit the current layout.
    """
    steps = list(steps)
    if not steps or steps[0].kind is not StepKind.PREPARE:
        raise PipelineError("A pipeline starts with a prepare step")
    variables = [step.name for step in steps if step.kind is StepKind.MEASURE]
    if not variables:
        raise PipelineError("A pipeline needs at least one measurement")
    if len(set(variables)) != len(variables):
        raise PipelineError(f"Duplicate measurement names: {variables}")

    branches: List[Branch] = [((), 1.0, None)]
    index = 0
    while index < len(steps):
        step = steps[index]
        try:
            if step.kind is StepKind.MEASURE:
                end = index
                while end < len(steps) and steps[end].kind is StepKind.MEASURE:
                    end += 1
                branches = _measure_group(branches, steps[index:end], final=end == len(steps))
                index = end
                continue
            branches = [(outcome, weight, _evolve(rho, step)) for outcome, weight, rho in branches]
        except PipelineError:
            raise
        except QCoreError as exc:
            raise PipelineError(f"Step {index} ({step.kind.value} on {step.labels}) failed: {exc}") from exc
        index += 1

    table: Dict[Tuple[Hashable, ...], float] = {}
    for outcome, weight, _ in branches:
        table[outcome] = table.get(outcome, 0.0) + weight
    return OutcomeDistribution(tuple(variables), table)


@dataclass(frozen=True, eq=False)
class BranchNode:
    """One measurement event; ``probability`` is absolute, not conditional on the parent."""

    variable: Optional[str]
    outcome: Optional[Hashable]
    probability: float
    state: Optional[DensityMatrix]
    children: Tuple["BranchNode", ...] = field(default_factory=tuple)

    def path_leaves(self, path: Tuple[Hashable, ...] = ()) -> List[Tuple[Tuple[Hashable, ...], float]]:
        here = path if self.variable is None else path + (self.outcome,)
        if not self.children:
            return [(here, self.probability)]
        leaves = []
        for child in self.children:
            leaves.extend(child.path_leaves(here))
        return leaves


@dataclass(frozen=True, eq=False)
class BranchTree:
    variables: Tuple[str, ...]
    root: BranchNode

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        self._check(self.root)

    def _check(self, node: BranchNode) -> None:
        if node.children:
            total = sum(child.probability for child in node.children)
            if abs(total - node.probability) > ALGEBRAIC_TOL:
                raise PipelineError(
                    f"Children of {node.variable}={node.outcome} sum to {total!r}, parent has {node.probability!r}"
                )
        for child in node.children:
            self._check(child)

    def leaves(self) -> List[Tuple[Tuple[Hashable, ...], float]]:
        return self.root.path_leaves()

    def joint(self) -> OutcomeDistribution:
        return OutcomeDistribution(self.variables, dict(self.leaves()))

    def marginal(self, variable: str) -> OutcomeDistribution:
        return self.joint().marginal(variable)

    def depth_totals(self) -> List[float]:
        """Total probability at each depth below the root."""
        totals = []
        level = list(self.root.children)
        while level:
            totals.append(sum(node.probability for node in level))
            level = [child for node in level for child in node.children]
        return totals


_QUBIT = 2


def qubit_ket(label: str, coefficients: Sequence[complex]) -> StateVector:
    """c0|0> + c1|1> on a single labelled qubit."""
    layout = SpaceLayout.of((label, _QUBIT))
    amplitudes = sum(c * basis_state(layout, (i,)).amplitudes for i, c in enumerate(coefficients))
    return StateVector(layout, amplitudes)


@functools.lru_cache(maxsize=None)
def copy_isometry(control: str, target: str) -> Operator:
    """|c, t> -> |c, t xor c>; copies the control's computational value into a blank target."""
    layout = SpaceLayout.of((control, _QUBIT), (target, _QUBIT))
    entries = np.zeros((layout.total_dim, layout.total_dim), dtype=np.complex128)
    for c in range(_QUBIT):
        for t in range(_QUBIT):
            entries += np.outer(basis_state(layout, (c, t ^ c)).amplitudes, basis_state(layout, (c, t)).amplitudes)
    return Operator(layout, entries)


def _pair_ket(first: str, second: str, coefficient_00: complex, coefficient_11: complex) -> StateVector:
    layout = SpaceLayout.of((first, _QUBIT), (second, _QUBIT))
    amplitudes = coefficient_00 * basis_state(layout, (0, 0)).amplitudes + coefficient_11 * basis_state(layout, (1, 1)).amplitudes
    return StateVector(layout, amplitudes)


def _complete(projectors: Dict[Hashable, Operator], rest: Hashable) -> Dict[Hashable, Operator]:
    layout = next(iter(projectors.values())).layout
    remainder = identity(layout).entries - sum(proj.entries for proj in projectors.values())
    projectors[rest] = Operator(layout, remainder, hermitian=True)
    return projectors


def wigner_measurement(wb: WignerBasis, system: str = "S", memory: str = "F") -> Dict[WignerOutcome, Operator]:
    projectors = {
        outcome: projector(_pair_ket(system, memory, *wb.ket_coefficients(outcome)))
        for outcome in (WignerOutcome.ONE, WignerOutcome.TWO)
    }
    return _complete(projectors, WignerOutcome.PERP)


@functools.lru_cache(maxsize=None)
def computational_measurement(label: str, keys=FriendOutcome) -> Mapping[Hashable, Operator]:
    layout = SpaceLayout.of((label, _QUBIT))
    return MappingProxyType({key: projector(basis_state(layout, (int(key),))) for key in keys})


def message_kets(params: ChannelParams, label: str = "R") -> Dict[MessageOutcome, StateVector]:
    cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
    phase = cmath.exp(1j * params.phi)
    return {
        MessageOutcome.ZERO: qubit_ket(label, (cos_t, phase * sin_t)),
        MessageOutcome.ONE: qubit_ket(label, (phase.conjugate() * sin_t, -cos_t)),
    }


def message_steps(params: ChannelParams, label: str = "R") -> Tuple[PipelineStep, PipelineStep]:
    """Measure-and-prepare channel on the record, then Wigner reading the message."""
    projectors = {n: projector(ket) for n, ket in message_kets(params, label).items()}
    return (
        PipelineStep.channel(KrausChannel(tuple(projectors.values())), on=label),
        PipelineStep.measure("n", projectors),
    )


def simple_wf_steps(
    src: SourceAmplitudes,
    wb: WignerBasis,
    record: RecordMode = RecordMode.NONE,
    params: Optional[ChannelParams] = None,
) -> List[PipelineStep]:
    """Friend's measurement as a copy isometry S -> F, optionally copied on to a record R.

    Measurements are named "w" (Wigner), "j" (record, without channel) and "n"
    (message, with channel). A channel needs a which-outcome record.
    """
    if params is not None and record is not RecordMode.WHICH_OUTCOME:
        raise PipelineError("A channel needs a which-outcome record to act on")
    steps = [
        PipelineStep.prepare(qubit_ket("S", src.amplitudes)),
        PipelineStep.prepare(qubit_ket("F", (1.0, 0.0))),
    ]
    if record is RecordMode.WHICH_OUTCOME:
        steps.append(PipelineStep.prepare(qubit_ket("R", (1.0, 0.0))))
    elif record is RecordMode.TRIVIAL:
        steps.append(PipelineStep.prepare(basis_state(SpaceLayout.of(("R", 1)), (0,))))
    steps.append(PipelineStep.isometry(copy_isometry("S", "F")))
    if record is RecordMode.WHICH_OUTCOME:
        steps.append(PipelineStep.isometry(copy_isometry("S", "R")))

    if params is not None:
        channel, message = message_steps(params)
        steps.extend([channel, PipelineStep.measure("w", wigner_measurement(wb)), message])
        return steps
    steps.append(PipelineStep.measure("w", wigner_measurement(wb)))
    if record is RecordMode.WHICH_OUTCOME:
        steps.append(PipelineStep.measure("j", computational_measurement("R")))
    return steps


def collapse_enumeration(src: SourceAmplitudes, wb: WignerBasis) -> BranchTree:
    """Friend's description: S collapses to |f>, memory copies f, Wigner measures the product state.

    Branches with probability below ALGEBRAIC_TOL are not expanded.
    """
    source = qubit_ket("S", src.amplitudes).density()
    friend_nodes = []
    for f, (p_f, collapsed) in zip(FriendOutcome, measure(source, list(computational_measurement("S").values()))):
        if collapsed is None:
            continue
        copied = run_state([PipelineStep.prepare(collapsed), PipelineStep.prepare(qubit_ket("F", (1.0, 0.0))),
                            PipelineStep.isometry(copy_isometry("S", "F"))])
        wigner = wigner_measurement(wb)
        children = tuple(
            BranchNode("w", w, p_f * p_w, post)
            for w, (p_w, post) in zip(wigner, measure(copied, list(wigner.values())))
        )
        friend_nodes.append(BranchNode("f", f, p_f, collapsed, children))
    return BranchTree(("f", "w"), BranchNode(None, None, 1.0, source, tuple(friend_nodes)))


def run_state(steps: Sequence[PipelineStep]) -> DensityMatrix:
    """State after a measurement-free step list."""
    rho = None
    for index, step in enumerate(steps):
        if step.kind is StepKind.MEASURE:
            raise PipelineError("run_state() does not take measurement steps")
        try:
            rho = _evolve(rho, step)
        except PipelineError:
            raise
        except QCoreError as exc:
            raise PipelineError(f"Step {index} ({step.kind.value}) failed: {exc}") from exc
    if rho is None:
        raise PipelineError("run_state() needs at least one step")
    return rho


_COS_PI_8 = math.cos(math.pi / 8)
_SIN_PI_8 = math.sin(math.pi / 8)

# Eigenvectors (+1, -1) of Bz = (Z+X)/sqrt2 and Bx = (Z-X)/sqrt2
_BOB_EIGENVECTORS = {
    "z": {1: (_COS_PI_8, _SIN_PI_8), -1: (-_SIN_PI_8, _COS_PI_8)},
    "x": {1: (_COS_PI_8, -_SIN_PI_8), -1: (_SIN_PI_8, _COS_PI_8)},
}


@functools.lru_cache(maxsize=None)
def bob_measurement(setting: str, label: str = "1") -> Mapping[int, Operator]:
    return MappingProxyType(
        {value: projector(qubit_ket(label, vector)) for value, vector in _BOB_EIGENVECTORS[setting].items()}
    )


@functools.lru_cache(maxsize=None)
def wigner_observable_measurement(setting: str, system: str = "2", memory: str = "F") -> Mapping[int, Operator]:
    """Eigenprojectors of Wz or Wx; eigenvalue 0 on the complement of span{|0,0>, |1,1>}."""
    if setting == "z":
        kets = {1: _pair_ket(system, memory, 1.0, 0.0), -1: _pair_ket(system, memory, 0.0, 1.0)}
    else:
        kets = {1: _pair_ket(system, memory, 1 / math.sqrt(2), 1 / math.sqrt(2)),
                -1: _pair_ket(system, memory, 1 / math.sqrt(2), -1 / math.sqrt(2))}
    return MappingProxyType(_complete({value: projector(ket) for value, ket in kets.items()}, 0))


def _extended_preparation(params: Optional[ChannelParams], record: bool) -> Tuple[List[PipelineStep], List[PipelineStep]]:
    """Measurement-free prefix of the extended setup and the message readout that follows it."""
    record = record or params is not None
    steps = [
        PipelineStep.prepare(_pair_ket("1", "2", 1 / math.sqrt(2), -1 / math.sqrt(2))),
        PipelineStep.prepare(qubit_ket("F", (1.0, 0.0))),
    ]
    if record:
        steps.append(PipelineStep.prepare(qubit_ket("R", (1.0, 0.0))))
    steps.append(PipelineStep.isometry(copy_isometry("2", "F")))
    if record:
        steps.append(PipelineStep.isometry(copy_isometry("2", "R")))
    if params is None:
        return steps, []
    channel, measurement = message_steps(params)
    steps.append(channel)
    return steps, [measurement]


def _check_settings(bob_setting: str, wigner_setting: str) -> None:
    if bob_setting not in _BOB_EIGENVECTORS or wigner_setting not in _BOB_EIGENVECTORS:
        raise PipelineError(f"Unknown settings ({bob_setting!r}, {wigner_setting!r}), expected 'z' or 'x'")


def _setting_measurements(bob_setting: str, wigner_setting: str) -> List[PipelineStep]:
    return [
        PipelineStep.measure("b", bob_measurement(bob_setting)),
        PipelineStep.measure("v", wigner_observable_measurement(wigner_setting)),
    ]


def extended_wf_steps(
    bob_setting: str,
    wigner_setting: str,
    params: Optional[ChannelParams] = None,
    record: bool = False,
) -> List[PipelineStep]:
    """Extended setup; measurements "b" (Bob), "v" (Wigner) and, with a channel, "n"."""
    _check_settings(bob_setting, wigner_setting)
    preparation, message = _extended_preparation(params, record)
    return [*preparation, *_setting_measurements(bob_setting, wigner_setting), *message]


def _correlator(distribution: OutcomeDistribution, n: Optional[MessageOutcome] = None) -> float:
    """E = sum b * v * p(b, v), or its conditional version given message n (0 when p(n) <= ALGEBRAIC_TOL)."""
    if n is not None:
        distribution = distribution.conditional("n", n)
    return sum(b * v * p for (b, v), p in distribution.probabilities.items())


def extended_distributions(
    params: Optional[ChannelParams] = None,
    record: bool = False,
) -> Dict[Tuple[str, str], OutcomeDistribution]:
    """Joint outcome tables of all four setting pairs; the shared prefix state is evolved once."""
    preparation, message = _extended_preparation(params, record)
    prepared = PipelineStep.prepare(run_state(preparation))
    return {
        (b, v): run_pipeline([prepared, *_setting_measurements(b, v), *message])
        for b in _BOB_EIGENVECTORS
        for v in _BOB_EIGENVECTORS
    }


def chsh_from_distributions(
    distributions: Mapping[Tuple[str, str], OutcomeDistribution],
    pattern: Sequence[Tuple[str, str, int]] = DEFAULT_SIGN_PATTERN,
    n: Optional[MessageOutcome] = None,
) -> float:
    return sum(sign * _correlator(distributions[(b, v)], n) for b, v, sign in pattern)


def pipeline_chsh(pattern: Sequence[Tuple[str, str, int]] = DEFAULT_SIGN_PATTERN, record: bool = False) -> float:
    return chsh_from_distributions(extended_distributions(record=record), pattern)


def pipeline_conditional_chsh(
    n: MessageOutcome,
    params: ChannelParams,
    pattern: Sequence[Tuple[str, str, int]] = DEFAULT_SIGN_PATTERN,
) -> float:
    """CHSH given message n, from joint outcome statistics of Bob, Wigner and the message."""
    return chsh_from_distributions(extended_distributions(params), pattern, MessageOutcome(int(n)))
