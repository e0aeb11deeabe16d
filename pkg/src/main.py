"""Main entry point for entcut.

This script serves as the entry point for the command line.
Subcommands and their flags are defined in ``cli.commands``.
"""

import sys
from pathlib import Path

# Add src directory to Python path
src_dir = Path(__file__).parent
sys.path.insert(0, str(src_dir))

from cli.commands import run
from shared.logger import get_logger

logger = get_logger(__name__)


def main() -> None:
    """Main entry point."""
    try:
        code = run()
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        code = 130
    except Exception:
        logger.exception("entcut failed unexpectedly")
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
