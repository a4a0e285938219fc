"""
Dependence subcommand: sensitivity of the solution to perturbed histories
"""
import logging

from config.solver_config import PERTURBATION_COUNT, PERTURBATION_MAGNITUDE
from delaysim.handlers.context import RunContext
from delaysim.models.presets import perturb_segment
from delaysim.solvers.stepper import continuous_dependence_experiment
from delaysim.utils.reports import ReportWriter

logger = logging.getLogger(__name__)


class DependenceHandler:
    """Ratio table of solution distance over history distance"""

    def __init__(self, writer: ReportWriter):
        self.writer = writer

    def handle(self, context: RunContext) -> bool:
        preset = context.preset
        settings = context.config.dependence
        a = preset.start_time
        end = float(settings.get('end_time', preset.end_time))
        if preset.rhs.has_atoms and 'end_time' not in settings:
            end = min(end, a + preset.rhs.min_ignore_interval(a, end))

        count = int(settings.get('count', PERTURBATION_COUNT))
        magnitude = float(settings.get('magnitude', PERTURBATION_MAGNITUDE))
        perturbations = [perturb_segment(preset.initial, context.rng, magnitude) for _ in range(count)]
        workers = int(settings.get('max_workers', context.settings.MAX_WORKERS))

        report = continuous_dependence_experiment(preset.operator, preset.rhs, preset.initial, perturbations,
                                                  a, end, context.config.stepper_config(end),
                                                  radius=context.config.probes.get('radius'),
                                                  max_workers=workers)
        self.writer.write_dict_rows('dependence.csv', report.rows)
        self.writer.write_text('dependence.txt', [
            f"model: {preset.name}, interval [{a:g}, {end:g}], {count} perturbations of size {magnitude:g}",
            report.summary_line(),
        ])
        if report.flagged:
            logger.warning(f"Continuous dependence flagged: {report.message}")
        return not report.flagged
