#main.py
"""
Main entry point for the softmix command.
Parses arguments, configures logging and dispatches to a subcommand.
"""

import sys
from pathlib import Path
from typing import Optional, Sequence

# Make the repository root importable when run as a script
sys.path.insert(0, str(Path(__file__).parent))

from config.logging_config import get_logger, setup_logging  # noqa: E402
from config.settings import get_settings  # noqa: E402
from src.terminal.cli_interface import run_command  # noqa: E402
from src.terminal.command_parser import create_arg_parser  # noqa: E402

logger = get_logger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    parser = create_arg_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    level = "DEBUG" if args.verbose else settings.log_level
    setup_logging(level=level, log_dir=settings.log_dir)
    logger.debug(f"softmix {settings.app_version} | command={args.command}")

    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
