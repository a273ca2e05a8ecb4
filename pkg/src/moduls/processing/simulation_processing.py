import logging
import time
from typing import Dict, Type

from moduls.processing.chsh_processor import ChshProcessor, SweepChshProcessor
from moduls.processing.command_processor import CommandProcessor, InvariantInputError, RunConfig, UsageError
from moduls.processing.simple_processor import SimpleProcessor, SweepSimpleProcessor
from moduls.processing.validate_processor import ValidateProcessor
from moduls.result_writer import OutputWriteError

logger = logging.getLogger(__name__)


class SimulationRunner:
    """
    Run the processor that belongs to the configured command.
    """

    PROCESSORS: Dict[str, Type[CommandProcessor]] = {
        "simple": SimpleProcessor,
        "sweep-simple": SweepSimpleProcessor,
        "chsh": ChshProcessor,
        "sweep-chsh": SweepChshProcessor,
        "validate": ValidateProcessor,
    }

    def __init__(self, config: RunConfig):
        """Select the processor for ``config.command``.

        Args:
            config: Validated run configuration.
        Raises:
            UsageError: If no processor handles the command.
        """
        processor_class = self.PROCESSORS.get(config.command)
        if processor_class is None:
            raise UsageError(f"No processor for command '{config.command}'")
        self.config = config
        self.processor = processor_class(config)
        logger.debug(f"Simulation runner initialized - Command: {config.command}, Processor: {processor_class.__name__}")

    def run(self) -> int:
        name = self.processor.__class__.__name__
        logger.info(f"Running processor: {name}")
        start_time = time.time()
        try:
            exit_code = self.processor.process()
        except (UsageError, InvariantInputError, OutputWriteError):
            raise
        except Exception as e:
            logger.error(f"Error in processor {name}: {e}", exc_info=True)
            raise RuntimeError(f"Processing failed in {name}") from e
        logger.info(f"Processor {name} finished in {time.time() - start_time:.2f} seconds (exit code {exit_code})")
        return exit_code
