"""
Solve subcommand: march the configured model and export the trajectory
"""
import logging

from config.solver_config import TRAJECTORY_HEADER
from delaysim.handlers.context import RunContext
from delaysim.solvers.stepper import solve
from delaysim.utils.reports import ReportWriter

logger = logging.getLogger(__name__)


class SolveHandler:
    """Runs one solve and writes trajectory, diagnostics and a text report"""

    def __init__(self, writer: ReportWriter):
        self.writer = writer

    def handle(self, context: RunContext) -> bool:
        preset = context.preset
        cfg = context.config.stepper_config(preset.end_time)
        result = solve(preset.operator, preset.rhs, preset.initial, preset.start_time, cfg)

        self.writer.write_csv('trajectory.csv', TRAJECTORY_HEADER, result.buffer.rows(context.representation))
        self.writer.write_dict_rows('solve_diagnostics.csv', result.diagnostics)

        final = result.buffer.last_state
        self.writer.write_text('solve_report.txt', [
            f"model: {preset.name} ({preset.description})",
            f"scheme: {cfg.scheme}, dt={cfg.dt:g}, interval [{preset.start_time:g}, {cfg.end_time:g}]",
            result.summary(),
            f"steps: {len(result.diagnostics)}, knots: {len(result.buffer)}",
            f"extension checks: {result.extension_checks}",
            f"final time: {result.buffer.end_time:.17g}",
            f"final norm: {final.norm():.17g}",
        ])

        if not result.completed:
            logger.warning(f"Solve did not complete: {result.summary()}")
        return result.completed
