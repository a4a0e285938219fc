"""
Verify subcommand: stepper against the waveform-relaxation reference,
with observed orders between consecutive step sizes
"""
import logging
from dataclasses import replace

import numpy as np

from config.solver_config import ORACLE_GRID_N, ORACLE_MAX_SWEEPS, ORACLE_TOL
from delaysim.handlers.context import RunContext
from delaysim.solvers.oracle import WaveformRelaxation, compare
from delaysim.solvers.stepper import solve
from delaysim.utils.errors import ConvergenceError
from delaysim.utils.reports import ReportWriter

logger = logging.getLogger(__name__)


class VerifyHandler:
    """Compares stepper runs at several step sizes with one reference solution"""

    def __init__(self, writer: ReportWriter):
        self.writer = writer

    def _end_time(self, context: RunContext) -> float:
        preset = context.preset
        settings = context.config.verify
        if 'end_time' in settings:
            return float(settings['end_time'])
        end = preset.end_time
        if preset.rhs.has_atoms:
            end = min(end, preset.start_time + preset.rhs.min_ignore_interval(preset.start_time, end))
        return end

    def handle(self, context: RunContext) -> bool:
        preset = context.preset
        settings = context.config.verify
        a = preset.start_time
        end = self._end_time(context)
        base_cfg = replace(context.config.stepper_config(end), end_time=end)
        scheme = settings.get('scheme', base_cfg.scheme)
        dts = [float(dt) for dt in settings.get('dts', [base_cfg.dt])]
        norm = settings.get('norm', 'sup')
        tolerance = settings.get('tolerance')

        try:
            oracle = WaveformRelaxation(preset.operator, preset.rhs, int(settings.get('grid_n', ORACLE_GRID_N)),
                                        float(settings.get('tol', ORACLE_TOL)),
                                        int(settings.get('max_sweeps', ORACLE_MAX_SWEEPS)))
            reference = oracle.solve(preset.initial, a, end)
        except ConvergenceError as e:
            logger.warning(f"Reference solve failed: {e}")
            self.writer.write_text('verify_report.txt', [f"FAIL reference: {e}"])
            return False

        rows = []
        passed = True
        previous = None
        for dt in dts:
            result = solve(preset.operator, preset.rhs, preset.initial, a, replace(base_cfg, dt=dt, scheme=scheme))
            error = compare(reference, result, norm) if result.completed else None
            order = None
            if previous is not None and error and previous[1]:
                order = float(np.log(previous[1] / error) / np.log(previous[0] / dt))
            rows.append({'dt': dt, 'scheme': scheme, 'error': error, 'order': order, 'status': result.status})
            passed = passed and result.completed
            previous = (dt, error)

        finest = min(rows, key=lambda row: row['dt'])
        if tolerance is not None and (finest['error'] is None or finest['error'] > tolerance):
            passed = False

        self.writer.write_dict_rows('verify.csv', rows)
        lines = [
            f"model: {preset.name}, interval [{a:g}, {end:g}], norm {norm}",
            f"reference: {len(reference)} knots, {len(oracle.residuals)} sweeps, "
            f"last residual {oracle.residuals[-1]:.3e}",
        ]
        for row in rows:
            error = 'n/a' if row['error'] is None else f"{row['error']:.6e}"
            order = '' if row['order'] is None else f", order {row['order']:.3f}"
            lines.append(f"dt={row['dt']:g} {row['scheme']}: error {error}{order} ({row['status']})")
        if tolerance is not None:
            lines.append(f"{'PASS' if passed else 'FAIL'} finest error vs tolerance {tolerance:g}")
        self.writer.write_text('verify_report.txt', lines)
        return passed
