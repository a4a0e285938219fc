#!/usr/bin/env python3
"""
Start script for the delay simulator
Runs one subcommand from the repository root without installing the package
"""

import os
import sys
import logging

# Ensure we're in the right directory
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from config.solver_config import EXIT_INPUT_ERROR  # noqa: E402
from delaysim.cli import main as cli_main  # noqa: E402

logger = logging.getLogger(__name__)


def main():
    """Main entry point"""
    try:
        status = cli_main(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("🛑 Run stopped by user")
        status = EXIT_INPUT_ERROR
    sys.exit(status)


if __name__ == '__main__':
    main()
