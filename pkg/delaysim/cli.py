"""
Batch front end: parse a run config, execute one subcommand, write reports
"""
import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from config.run_config import load_run_config
from config.solver_config import (EXIT_INPUT_ERROR, EXIT_OK, EXIT_VIOLATION, LOG_FORMAT, SUBCOMMANDS,
                                  get_config)
from delaysim.handlers.checks_handler import ChecksHandler
from delaysim.handlers.context import RunContext
from delaysim.handlers.dependence_handler import DependenceHandler
from delaysim.handlers.invariance_handler import InvarianceHandler
from delaysim.handlers.solve_handler import SolveHandler
from delaysim.handlers.verify_handler import VerifyHandler
from delaysim.utils.errors import ContractViolation, ConvergenceError, InputError
from delaysim.utils.reports import ReportWriter

logger = logging.getLogger(__name__)

HANDLERS = {
    'solve': SolveHandler,
    'verify': VerifyHandler,
    'invariance': InvarianceHandler,
    'dependence': DependenceHandler,
    'checks': ChecksHandler,
}


def configure_logging(settings=None):
    """Stdout logging, plus a UTF-8 log file when the profile names one"""
    settings = settings or get_config()
    handlers = [logging.StreamHandler(sys.stdout)]
    if settings.LOG_FILE:
        handlers.append(logging.FileHandler(settings.LOG_FILE, encoding='utf-8'))
    logging.basicConfig(
        format=LOG_FORMAT,
        level=getattr(logging, str(settings.LOG_LEVEL).upper(), logging.INFO),
        handlers=handlers,
        force=True
    )


def run(config_path, subcommand: str, out_dir=None, seed: Optional[int] = None) -> int:
    """Execute one subcommand; returns the process exit status"""
    settings = get_config()
    if subcommand not in HANDLERS:
        print(f"error: unknown subcommand {subcommand!r}; choose from {', '.join(SUBCOMMANDS)}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if seed is not None and seed < 0:
        print(f"error: seed must be non-negative, got {seed}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        run_config = load_run_config(config_path)
        seed = run_config.seed if seed is None else seed
        rng = np.random.default_rng(seed)
        preset = run_config.build_preset(rng)
        writer = ReportWriter(out_dir or settings.OUTPUT_DIR, seed, run_config.output.get('prefix', ''))
        context = RunContext(run_config, preset, seed, rng, settings)

        logger.info(f"Running {subcommand} on {preset.name} (seed {seed})")
        passed = HANDLERS[subcommand](writer).handle(context)

    except InputError as e:
        logger.error(f"Input error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (ContractViolation, ConvergenceError) as e:
        logger.warning(f"{subcommand} flagged: {e}")
        print(f"violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    except OSError as e:
        logger.error(f"Output error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    status = EXIT_OK if passed else EXIT_VIOLATION
    logger.info(f"{subcommand} finished with exit status {status}")
    return status


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog='delaysim',
        description='Simulate and check parabolic equations with state-dependent delays'
    )
    parser.add_argument('--config', required=True, help='JSON run config')
    parser.add_argument('--out', default=None, help='output directory')
    parser.add_argument('--seed', type=int, default=None, help='seed for random probes')
    parser.add_argument('--subcommand', choices=SUBCOMMANDS, default='solve', help='what to run')
    args = parser.parse_args(argv)

    configure_logging()
    return run(args.config, args.subcommand, args.out, args.seed)


if __name__ == '__main__':
    sys.exit(main())
