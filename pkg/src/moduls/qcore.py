"""
Dense complex linear algebra for small labelled tensor-product Hilbert spaces.

Factor ordering follows the Kronecker convention with the leftmost factor most
significant: on a layout (S, F, R) the basis ket |s, f, r> sits at index
(s * dim_F + f) * dim_R + r.

All objects are immutable after construction and validated on creation, so any
DensityMatrix that exists is Hermitian, has unit trace and is positive
semidefinite within the module tolerances.
"""

import functools
import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

# Tolerances for dimension <= 16 in double precision
ALGEBRAIC_TOL = 1e-12
SPECTRAL_TOL = 1e-10


class QCoreError(ValueError):
    """Base class for all linear-algebra contract violations."""


class LayoutError(QCoreError):
    """Malformed factor list or unknown factor label."""


class LayoutMismatchError(QCoreError):
    """Two objects that must share a layout do not."""


class DimensionMismatchError(QCoreError):
    """A payload does not fit the factor it targets."""


class NotNormalizedError(QCoreError):
    """State vector norm differs from 1."""


class NotHermitianError(QCoreError):
    """Operator required to be Hermitian is not."""


class InvalidDensityMatrixError(QCoreError):
    """Matrix is not a valid density matrix."""


class IncompleteChannelError(QCoreError):
    """Kraus operators do not satisfy sum K^dagger K = 1."""


class ProjectorSetError(QCoreError):
    """Projectors are not Hermitian, idempotent, orthogonal and complete."""


class ProbabilityRangeError(QCoreError):
    """A Born probability fell outside [0, 1] beyond tolerance."""


class EmptyInputError(QCoreError):
    """An operation received an empty list."""


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered list of (label, dimension) tensor factors."""

    factors: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        if not factors:
            raise LayoutError("A layout needs at least one factor")
        labels = tuple(label for label, _ in factors)
        if len(set(labels)) != len(labels):
            raise LayoutError(f"Duplicate factor labels: {list(labels)}")
        for label, dim in factors:
            if dim < 1:
                raise LayoutError(f"Factor '{label}' has dimension {dim}, expected >= 1")
        dims = tuple(dim for _, dim in factors)
        object.__setattr__(self, "factors", factors)
        # Derived once; layouts are immutable
        object.__setattr__(self, "_labels", labels)
        object.__setattr__(self, "_dims", dims)
        object.__setattr__(self, "_total_dim", int(np.prod(dims)))
        object.__setattr__(self, "_positions", {label: index for index, label in enumerate(labels)})

    @classmethod
    def of(cls, *factors: Tuple[str, int]) -> "SpaceLayout":
        return cls(tuple(factors))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    @property
    def dims(self) -> Tuple[int, ...]:
        return self._dims

    @property
    def total_dim(self) -> int:
        return self._total_dim

    def position(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise LayoutError(f"Unknown factor label '{label}' in layout {self.labels}") from None

    def dim(self, label: str) -> int:
        return self._dims[self.position(label)]

    def concat(self, other: "SpaceLayout") -> "SpaceLayout":
        return SpaceLayout(self.factors + other.factors)

    def restrict(self, labels: Iterable[str]) -> "SpaceLayout":
        """Sub-layout with the given labels, in this layout's order."""
        wanted = set(labels)
        for label in wanted:
            self.position(label)
        return SpaceLayout(tuple(f for f in self.factors if f[0] in wanted))


def _frozen_array(values, shape: Tuple[int, ...], what: str) -> np.ndarray:
    array = np.array(values, dtype=np.complex128, copy=True)
    if array.shape != shape:
        raise DimensionMismatchError(f"{what} has shape {array.shape}, expected {shape}")
    if not np.all(np.isfinite(array)):
        raise QCoreError(f"{what} contains NaN or Inf entries")
    array.setflags(write=False)
    return array


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def _is_hermitian(entries: np.ndarray, tol: float) -> bool:
    return _max_abs(entries - entries.conj().T) <= tol


def _require_same_layout(first: SpaceLayout, second: SpaceLayout) -> None:
    if first != second:
        raise LayoutMismatchError(f"Layout {first.labels}{first.dims} does not match {second.labels}{second.dims}")


def _permute_operator(entries: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix; new factor k is old factor perm[k]."""
    count = len(dims)
    tensor_form = entries.reshape(tuple(dims) + tuple(dims))
    axes = list(perm) + [p + count for p in perm]
    size = int(np.prod([dims[p] for p in perm]))
    return tensor_form.transpose(axes).reshape(size, size)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a labelled layout."""

    layout: SpaceLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen_array(self.amplitudes, (self.layout.total_dim,), "State vector")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > ALGEBRAIC_TOL:
            raise NotNormalizedError(f"State vector norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        """Inner product <self|other>."""
        _require_same_layout(self.layout, other.layout)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix on a layout; ``hermitian=True`` asserts and checks Hermiticity."""

    layout: SpaceLayout
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        dim = self.layout.total_dim
        entries = _frozen_array(self.entries, (dim, dim), "Operator")
        if self.hermitian and not _is_hermitian(entries, ALGEBRAIC_TOL):
            raise NotHermitianError("Operator flagged hermitian differs from its conjugate transpose")
        object.__setattr__(self, "entries", entries)

    def adjoint(self) -> "Operator":
        return Operator(self.layout, self.entries.conj().T, hermitian=self.hermitian)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a layout."""

    layout: SpaceLayout
    entries: np.ndarray

    def __post_init__(self):
        dim = self.layout.total_dim
        entries = _frozen_array(self.entries, (dim, dim), "Density matrix")
        if not _is_hermitian(entries, ALGEBRAIC_TOL):
            raise InvalidDensityMatrixError("Density matrix is not Hermitian")
        trace = complex(np.trace(entries))
        if abs(trace - 1.0) > ALGEBRAIC_TOL:
            raise InvalidDensityMatrixError(f"Density matrix trace is {trace!r}, expected 1")
        min_eigenvalue = float(np.min(np.linalg.eigvalsh(entries)))
        if min_eigenvalue < -SPECTRAL_TOL:
            raise InvalidDensityMatrixError(f"Density matrix has negative eigenvalue {min_eigenvalue!r}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def maximally_mixed(cls, layout: SpaceLayout) -> "DensityMatrix":
        dim = layout.total_dim
        return cls(layout, np.eye(dim) / dim)

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.entries)))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map given by Kraus operators on one common layout."""

    operators: Tuple[Operator, ...]

    def __post_init__(self):
        operators = tuple(self.operators)
        if not operators:
            raise EmptyInputError("A Kraus channel needs at least one operator")
        layout = operators[0].layout
        for op in operators[1:]:
            _require_same_layout(layout, op.layout)
        completeness = sum(op.entries.conj().T @ op.entries for op in operators)
        deviation = _max_abs(completeness - np.eye(layout.total_dim))
        if deviation > SPECTRAL_TOL:
            raise IncompleteChannelError(f"Kraus completeness violated by {deviation:.3e}")
        object.__setattr__(self, "operators", operators)

    @property
    def layout(self) -> SpaceLayout:
        return self.operators[0].layout


QuantumObject = Union[StateVector, Operator, DensityMatrix]


def basis_state(layout: SpaceLayout, indices: Sequence[int]) -> StateVector:
    """Computational basis ket with one index per factor."""
    if len(indices) != len(layout.factors):
        raise DimensionMismatchError(f"Expected {len(layout.factors)} indices, got {len(indices)}")
    for (label, dim), index in zip(layout.factors, indices):
        if not 0 <= index < dim:
            raise DimensionMismatchError(f"Index {index} out of range for factor '{label}' (dim {dim})")
    amplitudes = np.zeros(layout.total_dim, dtype=np.complex128)
    amplitudes[int(np.ravel_multi_index(tuple(indices), layout.dims))] = 1.0
    return StateVector(layout, amplitudes)


def identity(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.eye(layout.total_dim), hermitian=True)


def projector(state: StateVector) -> Operator:
    return Operator(state.layout, np.outer(state.amplitudes, state.amplitudes.conj()), hermitian=True)


def tensor(parts: Sequence[QuantumObject]) -> QuantumObject:
    """Kronecker product of states, operators or density matrices, leftmost most significant."""
    parts = list(parts)
    if not parts:
        raise EmptyInputError("tensor() needs at least one part")
    kind = type(parts[0])
    if any(type(part) is not kind for part in parts):
        raise QCoreError("tensor() cannot mix states, operators and density matrices")

    layout = functools.reduce(lambda left, right: left.concat(right), (part.layout for part in parts))
    if kind is StateVector:
        return StateVector(layout, functools.reduce(np.kron, (part.amplitudes for part in parts)))
    entries = functools.reduce(np.kron, (part.entries for part in parts))
    if kind is Operator:
        return Operator(layout, entries, hermitian=all(part.hermitian for part in parts))
    return DensityMatrix(layout, entries)


# Operators hash by identity, so only reused operator objects hit the cache
@functools.lru_cache(maxsize=256)
def embed(op: Operator, layout: SpaceLayout) -> Operator:
    """Lift an operator on some labelled factors into ``layout`` (identity on the rest)."""
    for label, dim in op.layout.factors:
        if layout.dim(label) != dim:
            raise DimensionMismatchError(
                f"Factor '{label}' has dimension {dim} in operator but {layout.dim(label)} in target"
            )
    if op.layout == layout:
        return op

    rest = [(label, dim) for label, dim in layout.factors if label not in op.layout.labels]
    rest_dim = int(np.prod([dim for _, dim in rest])) if rest else 1
    current_labels = list(op.layout.labels) + [label for label, _ in rest]
    current_dims = list(op.layout.dims) + [dim for _, dim in rest]
    entries = np.kron(op.entries, np.eye(rest_dim))
    perm = [current_labels.index(label) for label in layout.labels]
    return Operator(layout, _permute_operator(entries, current_dims, perm), hermitian=op.hermitian)


def partial_trace(rho: DensityMatrix, discard: Union[str, Iterable[str]]) -> DensityMatrix:
    """Trace out the factors named in ``discard``."""
    discard_set = {discard} if isinstance(discard, str) else set(discard)
    layout = rho.layout
    for label in discard_set:
        layout.position(label)
    keep = [label for label in layout.labels if label not in discard_set]
    drop = [label for label in layout.labels if label in discard_set]
    if not keep:
        raise LayoutError("partial_trace() cannot discard every factor")
    if not drop:
        return rho

    perm = [layout.position(label) for label in keep + drop]
    keep_dim = int(np.prod([layout.dim(label) for label in keep]))
    drop_dim = int(np.prod([layout.dim(label) for label in drop]))
    reordered = _permute_operator(rho.entries, layout.dims, perm).reshape(keep_dim, drop_dim, keep_dim, drop_dim)
    reduced = np.trace(reordered, axis1=1, axis2=3)
    return DensityMatrix(layout.restrict(keep), reduced)


def apply_channel(rho: DensityMatrix, channel: KrausChannel, on: str) -> DensityMatrix:
    """Apply ``channel`` to the factor ``on``: rho -> sum_i (1 x K_i) rho (1 x K_i)^dagger."""
    target_dim = rho.layout.dim(on)
    if channel.layout.total_dim != target_dim:
        raise DimensionMismatchError(
            f"Channel acts on dimension {channel.layout.total_dim}, factor '{on}' has dimension {target_dim}"
        )
    target = SpaceLayout.of((on, target_dim))
    result = np.zeros_like(rho.entries)
    for kraus in channel.operators:
        lifted = embed(Operator(target, kraus.entries), rho.layout).entries
        result = result + lifted @ rho.entries @ lifted.conj().T
    return DensityMatrix(rho.layout, result)


def expectation(rho: DensityMatrix, obs: Operator) -> float:
    """Tr(obs rho) for a Hermitian observable."""
    _require_same_layout(rho.layout, obs.layout)
    if not _is_hermitian(obs.entries, ALGEBRAIC_TOL):
        raise NotHermitianError("Expectation values need a Hermitian observable")
    value = complex(np.trace(obs.entries @ rho.entries))
    if abs(value.imag) > SPECTRAL_TOL:
        raise QCoreError(f"Expectation value has imaginary part {value.imag:.3e}")
    return float(value.real)


def _check_projector_set(projectors: Sequence[Operator], layout: SpaceLayout) -> None:
    if not projectors:
        raise EmptyInputError("A measurement needs at least one projector")
    for proj in projectors:
        _require_same_layout(layout, proj.layout)
    stack = np.stack([proj.entries for proj in projectors])
    for index in np.flatnonzero(np.max(np.abs(stack - stack.conj().transpose(0, 2, 1)), axis=(1, 2)) > SPECTRAL_TOL):
        raise ProjectorSetError(f"Projector {index} is not Hermitian")
    # products[i, j] = P_i P_j for every pair in one batched matmul
    products = np.matmul(stack[:, None], stack[None, :])
    count = len(projectors)
    diagonal = np.arange(count)
    for index in np.flatnonzero(np.max(np.abs(products[diagonal, diagonal] - stack), axis=(1, 2)) > SPECTRAL_TOL):
        raise ProjectorSetError(f"Projector {index} is not idempotent")
    overlaps = np.max(np.abs(products), axis=(2, 3))
    overlaps[diagonal, diagonal] = 0.0
    for first, second in zip(*np.nonzero(overlaps > SPECTRAL_TOL)):
        raise ProjectorSetError(f"Projectors {min(first, second)} and {max(first, second)} are not orthogonal")
    if _max_abs(stack.sum(axis=0) - np.eye(layout.total_dim)) > SPECTRAL_TOL:
        raise ProjectorSetError("Projectors do not sum to the identity")


def born_probabilities(rho: DensityMatrix, projectors: Sequence[Operator]) -> List[float]:
    """p_i = Tr(P_i rho) for a complete orthogonal projector set."""
    projectors = list(projectors)
    _check_projector_set(projectors, rho.layout)
    probabilities = []
    for index, proj in enumerate(projectors):
        value = float(np.real(np.trace(proj.entries @ rho.entries)))
        if value < -ALGEBRAIC_TOL or value > 1.0 + ALGEBRAIC_TOL:
            raise ProbabilityRangeError(f"Probability {value!r} of outcome {index} outside [0, 1]")
        probabilities.append(min(max(value, 0.0), 1.0))
    total = sum(probabilities)
    if abs(total - 1.0) > SPECTRAL_TOL:
        raise ProbabilityRangeError(f"Probabilities sum to {total!r}")
    return probabilities


def measure(rho: DensityMatrix, projectors: Sequence[Operator]) -> List[Tuple[float, Optional[DensityMatrix]]]:
    """Projective measurement with Lueders update; branches below ALGEBRAIC_TOL carry no post-state."""
    projectors = list(projectors)
    probabilities = born_probabilities(rho, projectors)
    outcomes: List[Tuple[float, Optional[DensityMatrix]]] = []
    for probability, proj in zip(probabilities, projectors):
        if probability < ALGEBRAIC_TOL:
            outcomes.append((probability, None))
            continue
        post = proj.entries @ rho.entries @ proj.entries
        post = (post + post.conj().T) / 2.0
        post = post / np.real(np.trace(post))
        outcomes.append((probability, DensityMatrix(rho.layout, post)))
    return outcomes


def joint_projectors(
    projector_sets: Sequence[Mapping[Hashable, Operator]],
    layout: SpaceLayout,
) -> Dict[Tuple[Hashable, ...], Operator]:
    """Products of projectors on disjoint factors, keyed by outcome tuples in set order."""
    if not projector_sets:
        raise EmptyInputError("joint_projectors() needs at least one projector set")
    joint: Dict[Tuple[Hashable, ...], np.ndarray] = {(): np.eye(layout.total_dim, dtype=np.complex128)}
    for projector_set in projector_sets:
        lifted = {key: embed(proj, layout).entries for key, proj in projector_set.items()}
        joint = {
            outcome + (key,): product @ entries
            for outcome, product in joint.items()
            for key, entries in lifted.items()
        }
    return {outcome: Operator(layout, entries, hermitian=True) for outcome, entries in joint.items()}


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities over tuples of outcome labels, one label per named variable."""

    variables: Tuple[str, ...]
    probabilities: Mapping[Tuple[Hashable, ...], float]

    def __post_init__(self):
        variables = tuple(self.variables)
        if not variables or len(set(variables)) != len(variables):
            raise QCoreError(f"Outcome variables must be non-empty and unique, got {variables}")
        table: Dict[Tuple[Hashable, ...], float] = {}
        for outcome, probability in dict(self.probabilities).items():
            key = outcome if isinstance(outcome, tuple) else (outcome,)
            if len(key) != len(variables):
                raise QCoreError(f"Outcome {key} does not match variables {variables}")
            value = float(probability)
            if not np.isfinite(value):
                raise QCoreError(f"Probability of {key} is not finite")
            table[key] = value
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "probabilities", MappingProxyType(table))

    def __getitem__(self, outcome) -> float:
        key = outcome if isinstance(outcome, tuple) else (outcome,)
        return self.probabilities.get(key, 0.0)

    def outcomes(self) -> List[Tuple[Hashable, ...]]:
        return list(self.probabilities.keys())

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    def values_of(self, variable: str) -> List[Hashable]:
        position = self._position(variable)
        seen: Dict[Hashable, None] = {}
        for outcome in self.probabilities:
            seen.setdefault(outcome[position], None)
        return list(seen)

    def _position(self, variable: str) -> int:
        try:
            return self.variables.index(variable)
        except ValueError:
            raise QCoreError(f"Unknown outcome variable '{variable}', have {self.variables}") from None

    def marginal(self, variables: Union[str, Sequence[str]]) -> "OutcomeDistribution":
        keep = (variables,) if isinstance(variables, str) else tuple(variables)
        positions = [self._position(variable) for variable in keep]
        table: Dict[Tuple[Hashable, ...], float] = {}
        for outcome, probability in self.probabilities.items():
            key = tuple(outcome[p] for p in positions)
            table[key] = table.get(key, 0.0) + probability
        return OutcomeDistribution(keep, table)

    def probability_of(self, variable: str, value: Hashable) -> float:
        return self.marginal(variable)[value]

    def conditional(self, variable: str, value: Hashable) -> "OutcomeDistribution":
        """Distribution of the other variables given ``variable == value``; all zero when p(value) <= ALGEBRAIC_TOL."""
        position = self._position(variable)
        rest = tuple(v for v in self.variables if v != variable)
        if not rest:
            raise QCoreError("Cannot condition a single-variable distribution on itself")
        weight = self.probability_of(variable, value)
        vanishing = weight <= ALGEBRAIC_TOL
        if vanishing:
            logger.debug(f"p({variable}={value}) vanishes, conditional probabilities set to 0")
        table: Dict[Tuple[Hashable, ...], float] = {}
        for outcome, probability in self.probabilities.items():
            if outcome[position] != value:
                continue
            key = outcome[:position] + outcome[position + 1:]
            table[key] = probability / weight if not vanishing else 0.0
        return OutcomeDistribution(rest, table)

    def max_abs_deviation(self, other: "OutcomeDistribution") -> float:
        if self.variables != other.variables:
            raise QCoreError(f"Cannot compare distributions over {self.variables} and {other.variables}")
        keys = set(self.probabilities) | set(other.probabilities)
        return max((abs(self[key] - other[key]) for key in keys), default=0.0)
