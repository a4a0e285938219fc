"""
Invariance subcommand: subtangential condition on probes, semigroup
invariance of the constraint cone, and monitoring of a solved trajectory
"""
import logging
from typing import List, Tuple

import numpy as np

from config.solver_config import BOUNDARY_PROBE_COUNT, H_LADDER
from delaysim.handlers.context import RunContext
from delaysim.models.history import Segment
from delaysim.models.presets import random_nonneg_state, random_probes
from delaysim.solvers.invariance import (VERDICT_INCONCLUSIVE, VERDICT_VIOLATED, corollary_condition_b,
                                         monitor_trajectory, semigroup_preserves_K, subtangential_check)
from delaysim.solvers.stepper import solve
from delaysim.utils.errors import InputError
from delaysim.utils.reports import CheckReport, ReportWriter

logger = logging.getLogger(__name__)


class InvarianceHandler:
    """Writes the subtangency table, the trajectory monitor and a summary"""

    def __init__(self, writer: ReportWriter):
        self.writer = writer

    def _probes(self, context: RunContext, result) -> List[Tuple[float, Segment]]:
        """Boundary probes for the cone, trajectory segments for other sets"""
        preset = context.preset
        count = int(context.config.probes.get('boundary_probes', BOUNDARY_PROBE_COUNT))
        if preset.constraint.kind == 'nonneg_cone':
            return [(t, psi) for t, psi, _ in random_probes(preset, context.rng, count, zero_head=True)]
        times = result.buffer.times
        times = times[times >= preset.start_time]
        picks = np.unique(np.linspace(0, times.size - 1, min(count, times.size)).astype(int))
        return [(float(times[i]), result.buffer.segment_at(float(times[i]))) for i in picks]

    def handle(self, context: RunContext) -> bool:
        preset = context.preset
        cset = preset.constraint
        if cset is None:
            self.writer.write_text('invariance.txt', ['N/A  invariance: the model has no constraint set'])
            return True

        h_values = context.config.probes.get('h_values', list(H_LADDER))
        cfg = context.config.stepper_config(preset.end_time)
        result = solve(preset.operator, preset.rhs, preset.initial, preset.start_time, cfg)

        rows = []
        verdicts = []
        for index, (t, psi) in enumerate(self._probes(context, result)):
            checks = []
            try:
                checks.append(subtangential_check(cset, preset.operator, preset.rhs, t, psi, h_values))
                if cset.time_invariant:
                    checks.append(corollary_condition_b(cset, preset.rhs, t, psi, h_values))
            except InputError as e:
                logger.warning(f"Probe {index} skipped: {e}")
                rows.append({'probe': index, 't': t, 'criterion': 'subtangential', 'h': None, 'ratio': None,
                             'verdict': 'inadmissible'})
                verdicts.append('inadmissible')
                continue
            for report in checks:
                verdicts.append(report.verdict)
                for row in report.rows:
                    rows.append({'probe': index, 't': t, 'criterion': report.criterion, **row})
        self.writer.write_dict_rows('subtangency.csv', rows)

        violated = verdicts.count(VERDICT_VIOLATED) + verdicts.count('inadmissible')
        reports = [CheckReport('subtangency', violated == 0, rows=[],
                               message=f"{len(verdicts) - violated - verdicts.count(VERDICT_INCONCLUSIVE)} "
                                       f"satisfied, {verdicts.count(VERDICT_INCONCLUSIVE)} inconclusive, "
                                       f"{violated} violated or inadmissible")]

        if cset.kind == 'nonneg_cone':
            states = [random_nonneg_state(preset.grid, preset.n_species, context.rng) for _ in range(5)]
            reports.append(semigroup_preserves_K(cset, preset.operator, states, [0.1, 1.0]))

        monitor = monitor_trajectory(cset, result)
        if not result.completed:
            monitor.passed = False
            monitor.message += f"; solve {result.summary()}"
        reports.append(monitor)
        self.writer.write_reports('invariance', reports)
        return not any(report.flagged for report in reports)
