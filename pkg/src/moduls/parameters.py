"""
Input parameters of the Wigner's-friend simulations.

These are plain data types shared by the simulation modules and the oracle.
They hold no prediction formulas. The random generators implement the seeded
recipe used by cross-validation:

* an amplitude pair is Haar-uniform on the qubit sphere: polar angle t with
  cos(t) ~ U(-1, 1), global phase g ~ U(0, 2pi) and relative phase r ~ U(0, 2pi),
  giving (cos(t/2) e^{ig}, sin(t/2) e^{i(g+r)});
* channel angles are theta ~ U(0, pi) and phi ~ U(0, 2pi).
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Tuple

import numpy as np

AMPLITUDE_TOL = 1e-12
INPUT_NORMALIZATION_TOL = 1e-9


class InvalidAmplitudesError(ValueError):
    """Amplitude input is malformed (non-finite value or negative modulus)."""


class NormalizationError(ValueError):
    """Amplitude pair is not normalized within tolerance."""


class FriendOutcome(IntEnum):
    ZERO = 0
    ONE = 1


class MessageOutcome(IntEnum):
    ZERO = 0
    ONE = 1


class WignerOutcome(Enum):
    """Wigner's result on S x F; PERP is the complement of span{|0,0>, |1,1>}."""

    ONE = 1
    TWO = 2
    PERP = "perp"

    @property
    def label(self) -> str:
        return str(self.value)


def _as_complex(name: str, value) -> complex:
    try:
        number = complex(value)
    except (TypeError, ValueError):
        raise InvalidAmplitudesError(f"Amplitude {name} is not a number: {value!r}") from None
    if not (math.isfinite(number.real) and math.isfinite(number.imag)):
        raise InvalidAmplitudesError(f"Amplitude {name} is not finite: {value!r}")
    return number


def _check_normalized(first: complex, second: complex, names: str) -> None:
    norm = abs(first) ** 2 + abs(second) ** 2
    if abs(norm - 1.0) > AMPLITUDE_TOL:
        raise NormalizationError(f"|{names[0]}|^2 + |{names[1]}|^2 = {norm!r}, expected 1")


def polar_pair(
    first_mod: float,
    first_phase: float,
    second_mod: float,
    second_phase: float,
    tolerance: float = INPUT_NORMALIZATION_TOL,
) -> Tuple[complex, complex]:
    """Build an amplitude pair from modulus/phase input and renormalize it exactly.

    Args:
        first_mod, first_phase: Modulus and phase (radians) of the first amplitude.
        second_mod, second_phase: Modulus and phase of the second amplitude.
        tolerance: Allowed deviation of the squared norm from 1 before rejecting.
    Returns:
        Tuple of complex amplitudes with squared norm 1 to machine precision.
    Raises:
        InvalidAmplitudesError: Non-finite input or negative modulus.
        NormalizationError: Squared norm differs from 1 by more than ``tolerance``.
    """
    values = (first_mod, first_phase, second_mod, second_phase)
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        raise InvalidAmplitudesError(f"Amplitude moduli and phases must be finite numbers, got {values}")
    if first_mod < 0 or second_mod < 0:
        raise InvalidAmplitudesError(f"Amplitude moduli must be non-negative, got {first_mod}, {second_mod}")
    norm = first_mod ** 2 + second_mod ** 2
    if abs(norm - 1.0) > tolerance:
        raise NormalizationError(f"Squared moduli sum to {norm!r}, expected 1 within {tolerance}")
    scale = 1.0 / math.sqrt(norm)
    return cmath.rect(first_mod * scale, first_phase), cmath.rect(second_mod * scale, second_phase)


@dataclass(frozen=True)
class SourceAmplitudes:
    """Source state alpha|0> + beta|1> emitted into S."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        alpha = _as_complex("alpha", self.alpha)
        beta = _as_complex("beta", self.beta)
        _check_normalized(alpha, beta, ("alpha", "beta"))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_polar(cls, alpha_mod, alpha_phase, beta_mod, beta_phase, tolerance=INPUT_NORMALIZATION_TOL):
        return cls(*polar_pair(alpha_mod, alpha_phase, beta_mod, beta_phase, tolerance))

    @classmethod
    def balanced(cls) -> "SourceAmplitudes":
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))

    @property
    def weights(self) -> Tuple[float, float]:
        return abs(self.alpha) ** 2, abs(self.beta) ** 2

    @property
    def amplitudes(self) -> Tuple[complex, complex]:
        return self.alpha, self.beta

    def describe(self) -> str:
        return f"alpha={_fmt_complex(self.alpha)} beta={_fmt_complex(self.beta)}"


@dataclass(frozen=True)
class WignerBasis:
    """Wigner's measurement basis |1> = a|0,0> + b|1,1>, |2> = b*|0,0> - a*|1,1>."""

    a: complex
    b: complex

    def __post_init__(self):
        a = _as_complex("a", self.a)
        b = _as_complex("b", self.b)
        _check_normalized(a, b, ("a", "b"))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        one = np.array(self.ket_coefficients(WignerOutcome.ONE))
        two = np.array(self.ket_coefficients(WignerOutcome.TWO))
        gram = np.array([[np.vdot(u, v) for v in (one, two)] for u in (one, two)])
        if np.max(np.abs(gram - np.eye(2))) > AMPLITUDE_TOL:
            raise NormalizationError("Wigner basis kets are not orthonormal")

    @classmethod
    def from_polar(cls, a_mod, a_phase, b_mod, b_phase, tolerance=INPUT_NORMALIZATION_TOL):
        return cls(*polar_pair(a_mod, a_phase, b_mod, b_phase, tolerance))

    @classmethod
    def bell(cls) -> "WignerBasis":
        """Bell-basis measurement: ONE is phi+ ("+"), TWO is phi- ("-"), PERP covers psi+/psi-."""
        return cls(1 / math.sqrt(2), 1 / math.sqrt(2))

    @classmethod
    def product(cls) -> "WignerBasis":
        return cls(1.0, 0.0)

    def ket_coefficients(self, outcome: WignerOutcome) -> Tuple[complex, complex]:
        """Coefficients of the outcome ket on (|0,0>, |1,1>)."""
        if outcome is WignerOutcome.ONE:
            return self.a, self.b
        if outcome is WignerOutcome.TWO:
            return self.b.conjugate(), -self.a.conjugate()
        raise ValueError("The PERP outcome has no ket in span{|0,0>, |1,1>}")

    @property
    def weights(self) -> Tuple[float, float]:
        return abs(self.a) ** 2, abs(self.b) ** 2

    def describe(self) -> str:
        return f"a={_fmt_complex(self.a)} b={_fmt_complex(self.b)}"


@dataclass(frozen=True)
class ChannelParams:
    """Message-basis angles of the measure-and-prepare channel (radians)."""

    theta: float
    phi: float

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError(f"Channel angles must be finite, got theta={theta}, phi={phi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def revealing(cls) -> "ChannelParams":
        return cls(0.0, 0.0)

    @classmethod
    def unbiased(cls) -> "ChannelParams":
        return cls(math.pi / 4, 0.0)

    def canonical(self) -> "ChannelParams":
        """Same channel with theta in [0, pi) and phi in [0, 2 pi)."""
        return ChannelParams(self.theta % math.pi, self.phi % (2 * math.pi))

    def describe(self) -> str:
        return f"theta={self.theta:.6f} phi={self.phi:.6f}"


def _fmt_complex(value: complex) -> str:
    return f"{value.real:+.6f}{value.imag:+.6f}j"


def random_amplitude_pair(rng: np.random.Generator) -> Tuple[complex, complex]:
    cos_polar = rng.uniform(-1.0, 1.0)
    half_polar = math.acos(cos_polar) / 2
    global_phase = rng.uniform(0.0, 2 * math.pi)
    relative_phase = rng.uniform(0.0, 2 * math.pi)
    return (
        cmath.rect(math.cos(half_polar), global_phase),
        cmath.rect(math.sin(half_polar), global_phase + relative_phase),
    )


def random_source(rng: np.random.Generator) -> SourceAmplitudes:
    return SourceAmplitudes(*random_amplitude_pair(rng))


def random_wigner_basis(rng: np.random.Generator) -> WignerBasis:
    return WignerBasis(*random_amplitude_pair(rng))


def random_channel_params(rng: np.random.Generator) -> ChannelParams:
    return ChannelParams(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
