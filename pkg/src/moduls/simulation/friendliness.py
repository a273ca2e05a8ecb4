"""
Extended Wigner's friend experiment with Bob.

Qubits 1 and 2 are prepared in (|0,0> - |1,1>)/sqrt(2). Bob measures qubit 1,
the friend measures qubit 2 into her memory F, and Wigner measures 2 x F.
The CHSH-like local friendliness expression

    <Bz Wz> + <Bx Wz> - <Bz Wx> + <Bx Wx> <= 2

is evaluated without records, with a which-outcome record, and conditioned on
the message of the measure-and-prepare channel.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from moduls.parameters import ChannelParams, FriendOutcome, MessageOutcome
from moduls.qcore import (
    ALGEBRAIC_TOL,
    SPECTRAL_TOL,
    DensityMatrix,
    EmptyInputError,
    LayoutError,
    LayoutMismatchError,
    Operator,
    SpaceLayout,
    StateVector,
    apply_channel,
    basis_state,
    born_probabilities,
    embed,
    expectation,
    measure,
    projector,
    tensor,
)
from moduls.simulation.channel import dephasing_channel, message_basis

logger = logging.getLogger(__name__)

LAYOUT_1 = SpaceLayout.of(("1", 2))
LAYOUT_2F = SpaceLayout.of(("2", 2), ("F", 2))
LAYOUT_12F = LAYOUT_1.concat(LAYOUT_2F)
LAYOUT_12FR = LAYOUT_12F.concat(SpaceLayout.of(("R", 2)))

LOCAL_FRIENDLINESS_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
SETTINGS = ("z", "x")

_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _unit(layout: SpaceLayout, index: int) -> np.ndarray:
    vector = np.zeros(layout.total_dim, dtype=np.complex128)
    vector[index] = 1.0
    return vector


def _eigenvalues(op: Operator) -> np.ndarray:
    return np.linalg.eigvalsh(op.entries)


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """Bob's observables on qubit 1 and Wigner's on 2 x F."""

    bob_z: Operator
    bob_x: Operator
    wigner_z: Operator
    wigner_x: Operator

    def __post_init__(self):
        for name in ("bob_z", "bob_x"):
            op = getattr(self, name)
            if op.layout != LAYOUT_1 or not op.hermitian:
                raise ValueError(f"{name} must be a Hermitian operator on qubit 1")
            if np.max(np.abs(np.abs(_eigenvalues(op)) - 1.0)) > SPECTRAL_TOL:
                raise ValueError(f"{name} must have eigenvalues +-1")
        outside = [_unit(LAYOUT_2F, 1), _unit(LAYOUT_2F, 2)]
        for name in ("wigner_z", "wigner_x"):
            op = getattr(self, name)
            if op.layout != LAYOUT_2F or not op.hermitian:
                raise ValueError(f"{name} must be a Hermitian operator on 2 x F")
            eigenvalues = np.sort(_eigenvalues(op))
            if np.max(np.abs(eigenvalues - np.array([-1.0, 0.0, 0.0, 1.0]))) > SPECTRAL_TOL:
                raise ValueError(f"{name} must have eigenvalues (-1, 0, 0, +1)")
            if any(np.max(np.abs(op.entries @ vector)) > SPECTRAL_TOL for vector in outside):
                raise ValueError(f"{name} must vanish outside span{{|0,0>, |1,1>}}")

    @classmethod
    def default(cls) -> "ObservableSet":
        """Bz = (Z+X)/sqrt2, Bx = (Z-X)/sqrt2, Wz and Wx act as Z and X on span{|0,0>, |1,1>}."""
        return _default_observables()

    @classmethod
    def _build_default(cls) -> "ObservableSet":
        bob_z = Operator(LAYOUT_1, (_PAULI_Z + _PAULI_X) / math.sqrt(2), hermitian=True)
        bob_x = Operator(LAYOUT_1, (_PAULI_Z - _PAULI_X) / math.sqrt(2), hermitian=True)
        ket_00, ket_11 = _unit(LAYOUT_2F, 0), _unit(LAYOUT_2F, 3)
        wigner_z = np.outer(ket_00, ket_00) - np.outer(ket_11, ket_11)
        wigner_x = np.outer(ket_00, ket_11) + np.outer(ket_11, ket_00)
        return cls(
            bob_z=bob_z,
            bob_x=bob_x,
            wigner_z=Operator(LAYOUT_2F, wigner_z, hermitian=True),
            wigner_x=Operator(LAYOUT_2F, wigner_x, hermitian=True),
        )

    def bob(self, setting: str) -> Operator:
        return {"z": self.bob_z, "x": self.bob_x}[setting]

    def wigner(self, setting: str) -> Operator:
        return {"z": self.wigner_z, "x": self.wigner_x}[setting]


@functools.lru_cache(maxsize=None)
def _default_observables() -> ObservableSet:
    return ObservableSet._build_default()


@dataclass(frozen=True)
class ChshTerm:
    bob: str
    wigner: str
    sign: int


@dataclass(frozen=True)
class ChshSpec:
    """Four signed correlators; exactly one is subtracted."""

    terms: Tuple[ChshTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        pairs = sorted((term.bob, term.wigner) for term in terms)
        if pairs != sorted((b, w) for b in SETTINGS for w in SETTINGS):
            raise ValueError(f"A CHSH expression needs each (bob, wigner) setting pair once, got {pairs}")
        if any(term.sign not in (1, -1) for term in terms):
            raise ValueError("CHSH signs must be +1 or -1")
        if sum(1 for term in terms if term.sign < 0) != 1:
            raise ValueError("Exactly one CHSH correlator must be subtracted")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def subtracting(cls, bob: str, wigner: str) -> "ChshSpec":
        order = (("z", "z"), ("x", "z"), ("z", "x"), ("x", "x"))
        return cls(tuple(ChshTerm(b, w, -1 if (b, w) == (bob, wigner) else 1) for b, w in order))

    @classmethod
    def default(cls) -> "ChshSpec":
        return cls.subtracting("z", "x")

    @classmethod
    def from_key(cls, key: str) -> "ChshSpec":
        """``key`` names the subtracted term as '<bob><wigner>', e.g. 'zx'."""
        if len(key) != 2 or key[0] not in SETTINGS or key[1] not in SETTINGS:
            raise ValueError(f"Unknown CHSH term '{key}', expected one of zz, xz, zx, xx")
        return cls.subtracting(key[0], key[1])

    @classmethod
    def variants(cls) -> List["ChshSpec"]:
        return [cls.subtracting(b, w) for w in SETTINGS for b in SETTINGS]

    @property
    def subtracted(self) -> str:
        term = next(term for term in self.terms if term.sign < 0)
        return f"{term.bob}{term.wigner}"

    def pattern(self) -> Tuple[Tuple[str, str, int], ...]:
        return tuple((term.bob, term.wigner, term.sign) for term in self.terms)


@dataclass(frozen=True)
class ConditionalChshRow:
    n: MessageOutcome
    theta: float
    phi: float
    value: float
    message_probability: float

    def __post_init__(self):
        if abs(self.value) > TSIRELSON_BOUND + SPECTRAL_TOL:
            raise ValueError(f"CHSH value {self.value!r} exceeds the Tsirelson bound")

    @property
    def violates(self) -> bool:
        return self.value > LOCAL_FRIENDLINESS_BOUND


def extended_state() -> StateVector:
    """(|0>_1|0,0>_2F - |1>_1|1,1>_2F)/sqrt(2)."""
    amplitudes = (_unit(LAYOUT_12F, 0) - _unit(LAYOUT_12F, 7)) / math.sqrt(2)
    return StateVector(LAYOUT_12F, amplitudes)


def extended_record_state() -> StateVector:
    """(|0>|0,0>|r0> - |1>|1,1>|r1>)/sqrt(2) on 1 x 2 x F x R."""
    amplitudes = (_unit(LAYOUT_12FR, 0) - _unit(LAYOUT_12FR, 15)) / math.sqrt(2)
    return StateVector(LAYOUT_12FR, amplitudes)


@functools.lru_cache(maxsize=None)
def _record_density() -> DensityMatrix:
    return extended_record_state().density()


def channel_extended_state(params: ChannelParams) -> DensityMatrix:
    """rho' = (1 x C)|Psi^r><Psi^r| for the extended setup."""
    channel = dephasing_channel(message_basis(params))
    return apply_channel(_record_density(), channel, on="R")


# Keyed by operator identity; the default observables are built once.
@functools.lru_cache(maxsize=64)
def _correlator(bob: Operator, wig: Operator, layout: SpaceLayout) -> Operator:
    try:
        return embed(tensor([bob, wig]), layout)
    except LayoutError as exc:
        raise LayoutMismatchError(f"State layout {layout.labels} lacks Bob's or Wigner's factors") from exc


def chsh_value(
    rho: DensityMatrix,
    spec: Optional[ChshSpec] = None,
    observables: Optional[ObservableSet] = None,
) -> float:
    """Signed sum of the four correlators on ``rho`` (extra factors such as R are ignored)."""
    spec = spec or ChshSpec.default()
    observables = observables or ObservableSet.default()
    value = 0.0
    for term in spec.terms:
        op = _correlator(observables.bob(term.bob), observables.wigner(term.wigner), rho.layout)
        value += term.sign * expectation(rho, op)
    return value


def _message_projectors(params: ChannelParams, layout: SpaceLayout) -> List[Operator]:
    try:
        return [embed(proj, layout) for proj in message_basis(params).projectors().values()]
    except LayoutError as exc:
        raise LayoutMismatchError(f"State layout {layout.labels} lacks the message factor R") from exc


def message_probability(rho: DensityMatrix, n: int, params: ChannelParams) -> float:
    """p(n) = Tr(1 x |n><n| rho)."""
    return born_probabilities(rho, _message_projectors(params, rho.layout))[int(n)]


def conditional_expectation(
    rho: DensityMatrix,
    bob: Operator,
    wig: Operator,
    n: int,
    params: ChannelParams,
) -> float:
    """<B x W>^{|n} = Tr(B x W x |n><n| rho) / p(n), defined as 0 when p(n) <= ALGEBRAIC_TOL."""
    p_n = message_probability(rho, n, params)
    if p_n <= ALGEBRAIC_TOL:
        logger.debug(f"p(n={int(n)}) vanishes at {params.describe()}, conditional expectation set to 0")
        return 0.0
    message = projector(message_basis(params).ket(n))
    try:
        op = embed(tensor([bob, wig, message]), rho.layout)
    except LayoutError as exc:
        raise LayoutMismatchError(f"State layout {rho.layout.labels} lacks the message factor R") from exc
    return expectation(rho, op) / p_n


def _conditional_rows(
    rho: DensityMatrix,
    params: ChannelParams,
    spec: ChshSpec,
    observables: ObservableSet,
) -> Tuple[ConditionalChshRow, ConditionalChshRow]:
    """Both message rows from one message measurement on ``rho``.

    B x W commutes with 1 x |n><n|, so the CHSH value on the Lueders
    post-state equals the conditional one.
    """
    rows = []
    for n, (p_n, post) in zip(MessageOutcome, measure(rho, _message_projectors(params, rho.layout))):
        if post is None:
            logger.debug(f"p(n={int(n)}) vanishes at {params.describe()}, conditional CHSH set to 0")
        value = chsh_value(post, spec, observables) if post is not None else 0.0
        rows.append(ConditionalChshRow(n=n, theta=params.theta, phi=params.phi, value=value, message_probability=p_n))
    return rows[0], rows[1]


def conditional_chsh_rows(
    params: ChannelParams,
    spec: Optional[ChshSpec] = None,
    observables: Optional[ObservableSet] = None,
) -> Tuple[ConditionalChshRow, ConditionalChshRow]:
    """CHSH conditioned on n=0 and n=1 at one channel setting."""
    return _conditional_rows(
        channel_extended_state(params),
        params,
        spec or ChshSpec.default(),
        observables or ObservableSet.default(),
    )


def conditional_chsh(
    n: int,
    params: ChannelParams,
    spec: Optional[ChshSpec] = None,
    observables: Optional[ObservableSet] = None,
) -> ConditionalChshRow:
    return conditional_chsh_rows(params, spec, observables)[int(n)]


def closed_form_conditional_chsh(n: int, params: ChannelParams) -> float:
    """sqrt2 + (-1)^n sqrt2 cos(phi) sin(2 theta) for the default sign pattern."""
    sign = 1.0 if int(n) == 0 else -1.0
    return math.sqrt(2) + sign * math.sqrt(2) * math.cos(params.phi) * math.sin(2 * params.theta)


def unconditioned_chsh(params: ChannelParams, spec: Optional[ChshSpec] = None) -> float:
    """sum_n p(n) CHSH^{|n}; the channel alone never restores a violation."""
    return sum(row.message_probability * row.value for row in conditional_chsh_rows(params, spec))


def violating_message(params: ChannelParams, spec: Optional[ChshSpec] = None) -> Optional[MessageOutcome]:
    """The message whose conditional CHSH value exceeds 2, if any."""
    return next((row.n for row in conditional_chsh_rows(params, spec) if row.violates), None)


def friend_conditioned_expectation(
    bob: Operator,
    wig: Operator,
    outcome: int,
    condition_on: str = "R",
) -> float:
    """<B x W> on the record state after fixing the friend's outcome via R or her memory F."""
    if condition_on not in ("R", "F"):
        raise ValueError(f"Can condition on 'R' or 'F', got '{condition_on}'")
    rho = _record_density()
    local = SpaceLayout.of((condition_on, 2))
    projectors = [embed(projector(basis_state(local, (f,))), rho.layout) for f in FriendOutcome]
    _, post = measure(rho, projectors)[int(outcome)]
    if post is None:
        return 0.0
    return expectation(post, _correlator(bob, wig, post.layout))


def sweep_chsh(
    phi: float,
    theta_values: Sequence[float],
    spec: Optional[ChshSpec] = None,
) -> List[ConditionalChshRow]:
    """Conditional CHSH rows for both messages at each theta, in grid order."""
    theta_values = list(theta_values)
    if not theta_values:
        raise EmptyInputError("sweep_chsh() needs a non-empty theta grid")
    spec = spec or ChshSpec.default()
    observables = ObservableSet.default()
    logger.info(f"Sweeping conditional CHSH over {len(theta_values)} theta values (phi={phi}, subtract={spec.subtracted})")
    rows = []
    for theta in theta_values:
        rows.extend(conditional_chsh_rows(ChannelParams(theta, phi), spec, observables))
        logger.debug(f"theta={theta:.6f}: CHSH|0={rows[-2].value:.12f} CHSH|1={rows[-1].value:.12f}")
    return rows
