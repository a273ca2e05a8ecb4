import logging
import math
from argparse import Namespace
from dataclasses import dataclass
from typing import Any, Dict, Optional

from moduls.parameters import (
    ChannelParams,
    InvalidAmplitudesError,
    NormalizationError,
    SourceAmplitudes,
    WignerBasis,
)
from moduls.result_writer import OUTPUT_FORMATS, ResultTable, ResultWriter

logger = logging.getLogger(__name__)

COMMANDS = ("simple", "sweep-simple", "chsh", "sweep-chsh", "validate")
SWEEP_COMMANDS = ("sweep-simple", "sweep-chsh")
CHSH_TERMS = ("zz", "xz", "zx", "xx")

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID_INPUT = 3
EXIT_IO = 4


class UsageError(Exception):
    """Malformed command line or configuration value."""


class InvariantInputError(Exception):
    """Well-formed input that violates a physical invariant (e.g. unnormalized amplitudes)."""


def _section(config: Dict[str, Any], *path: str) -> Dict[str, Any]:
    node = config
    for key in path:
        if not isinstance(node, dict) or not isinstance(node.get(key), dict):
            raise UsageError(f"Missing required config section '{'.'.join(path)}'")
        node = node[key]
    return node


def _pick(args: Namespace, name: str, section: Dict[str, Any], key: Optional[str] = None):
    """Command-line value if given, else the config value."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return section.get(key or name)


def _finite(name: str, value) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(number):
        raise UsageError(f"{name} must be finite, got {value!r}")
    return number


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one CLI run (command-line flags override the stage config)."""

    command: str
    source: SourceAmplitudes
    wigner_basis: WignerBasis
    theta: Optional[float]
    phi: float
    grid: int
    out: str
    output_format: str
    seed: int
    trials: int
    threshold: float
    subtract: str

    @property
    def channel(self) -> Optional[ChannelParams]:
        if self.theta is None:
            return None
        return ChannelParams(self.theta, self.phi)

    @classmethod
    def from_sources(cls, args: Namespace, config: Dict[str, Any]) -> "RunConfig":
        """Merge parsed arguments with the stage configuration.

        Args:
            args: Namespace from ``parse_arguments``; unset flags are None.
            config: Stage configuration loaded from config/<stage>.json.
        Returns:
            A validated RunConfig.
        Raises:
            UsageError: Unknown command, malformed number or amplitude, grid < 2 for sweeps, trials < 1.
            InvariantInputError: Amplitude pair not normalized within tolerance.
        """
        command = getattr(args, "command", None)
        if command not in COMMANDS:
            raise UsageError(f"Unknown command '{command}', expected one of {COMMANDS}")

        simulation = _section(config, "simulation")
        validation = _section(config, "validation")
        source_cfg = _section(config, "simulation", "source")
        basis_cfg = _section(config, "simulation", "wigner_basis")
        channel_cfg = _section(config, "simulation", "channel")

        try:
            source = SourceAmplitudes.from_polar(
                _finite("alpha-mod", _pick(args, "alpha_mod", source_cfg)),
                _finite("alpha-phase", _pick(args, "alpha_phase", source_cfg)),
                _finite("beta-mod", _pick(args, "beta_mod", source_cfg)),
                _finite("beta-phase", _pick(args, "beta_phase", source_cfg)),
            )
            wigner_basis = WignerBasis.from_polar(
                _finite("a-mod", _pick(args, "a_mod", basis_cfg)),
                _finite("a-phase", _pick(args, "a_phase", basis_cfg)),
                _finite("b-mod", _pick(args, "b_mod", basis_cfg)),
                _finite("b-phase", _pick(args, "b_phase", basis_cfg)),
            )
        except InvalidAmplitudesError as e:
            raise UsageError(f"Malformed amplitudes: {e}") from e
        except NormalizationError as e:
            raise InvariantInputError(f"Unnormalized amplitudes: {e}") from e

        theta = _pick(args, "theta", channel_cfg)
        theta = None if theta is None else _finite("theta", theta)
        phi = _finite("phi", _pick(args, "phi", channel_cfg) or 0.0)

        grid = int(_finite("grid", _pick(args, "grid", simulation)))
        if command in SWEEP_COMMANDS and grid < 2:
            raise UsageError(f"Sweeps need a grid of at least 2 points, got {grid}")

        output_format = _pick(args, "format", simulation, "output_format") or "csv"
        if output_format not in OUTPUT_FORMATS:
            raise UsageError(f"Unknown output format '{output_format}'")

        seed = int(_finite("seed", _pick(args, "seed", validation)))
        if seed < 0:
            raise UsageError(f"seed must be non-negative, got {seed}")
        trials = int(_finite("trials", _pick(args, "trials", validation)))
        if command == "validate" and trials < 1:
            raise UsageError(f"trials must be >= 1, got {trials}")

        subtract = _pick(args, "subtract", simulation) or "zx"
        if subtract not in CHSH_TERMS:
            raise UsageError(f"Unknown CHSH term '{subtract}', expected one of {CHSH_TERMS}")

        run_config = cls(
            command=command,
            source=source,
            wigner_basis=wigner_basis,
            theta=theta,
            phi=phi,
            grid=grid,
            out=getattr(args, "out", None) or "-",
            output_format=output_format,
            seed=seed,
            trials=trials,
            threshold=_finite("threshold", validation.get("threshold", 1e-10)),
            subtract=subtract,
        )
        logger.debug(f"Run config: {run_config}")
        return run_config


class CommandProcessor:
    """Base class for the per-command processors."""

    def __init__(self, config: RunConfig, writer: Optional[ResultWriter] = None):
        self.config = config
        self.writer = writer or ResultWriter(config.out, config.output_format)

    def optional_channel(self) -> Optional[ChannelParams]:
        """Configured channel with theta in [0, pi) and phi in [0, 2 pi), or None."""
        params = self.config.channel
        return params.canonical() if params is not None else None

    def require_channel(self) -> ChannelParams:
        params = self.optional_channel()
        if params is None:
            raise UsageError(f"Command '{self.config.command}' needs --theta")
        return params

    def emit(self, table: ResultTable) -> int:
        self.writer.write_table(table)
        return EXIT_OK

    def process(self) -> int:
        """Run the command and write its output.

        Returns:
            Process exit code.
        """
        raise NotImplementedError("Subclasses must implement process()")
