"""
Spatiotemporal Graph Convolutions for Motion Prediction
Main entry point: data synthesis, training, evaluation, verification, parameter accounting and benchmarks.
"""

import logging
import sys

from config import settings
from src.cli.runner import run

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format=settings.LOG_FORMAT
)

logger = logging.getLogger(__name__)


def main() -> int:
    """Run one subcommand, e.g. `python main.py verify` or `python main.py params --kind dstd`."""
    try:
        return run(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 1


if __name__ == "__main__":
    sys.exit(main())
