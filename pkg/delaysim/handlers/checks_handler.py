"""
Checks subcommand: sampled probes of every hypothesis the model declares
"""
import logging
from typing import List, Tuple

import numpy as np

from config.solver_config import (BOUNDARY_PROBE_COUNT, MUTATION_COUNT, PERTURBATION_MAGNITUDE, PROBE_COUNT,
                                  PROBE_KNOTS)
from delaysim.handlers.context import RunContext
from delaysim.models.delay_kernel import (atom_moduli, check_ignore_interval, check_variation_bound,
                                          check_variation_lipschitz, fd_perturbation_bound, probe_point_map)
from delaysim.models.history import Segment
from delaysim.models.presets import check_normalization, random_probes, random_segment
from delaysim.models.rhs import (check_outer_lipschitz, eval_F_split, lipschitz_surrogate_probe,
                                 linear_growth_probe, quasipositivity_probe)
from delaysim.utils.reports import CheckReport, ReportWriter

logger = logging.getLogger(__name__)


def merge_reports(name: str, reports: List[CheckReport]) -> CheckReport:
    """One report from per-probe reports; rows gain a 'probe' column"""
    rows = []
    for index, report in enumerate(reports):
        rows.extend({'probe': index, **row} for row in report.rows)
    failed = [index for index, report in enumerate(reports) if report.flagged]
    applicable = any(report.applicable for report in reports)
    message = reports[0].message if reports else ''
    if failed:
        message = f"failed on probes {failed}: {reports[failed[0]].message}"
    return CheckReport(name, not failed, applicable, rows, message)


class ChecksHandler:
    """Runs the assumption suite on seeded random probes"""

    def __init__(self, writer: ReportWriter):
        self.writer = writer

    def _neighbour(self, context: RunContext, psi: Segment, magnitude: float) -> Segment:
        """psi plus a small non-negative random history"""
        bump = random_segment(psi.grid, psi.n_species, psi.delay_horizon, context.rng, psi.anchor_time,
                              psi.times.size, amplitude=magnitude)
        thetas = np.union1d(psi.thetas, bump.thetas)
        values = psi.values_at(thetas) + bump.values_at(thetas)
        return Segment(psi.anchor_time, psi.delay_horizon, psi.anchor_time + thetas, values, psi.grid)

    def _outer_samples(self, context: RunContext, probes) -> List[Tuple[float, np.ndarray, np.ndarray]]:
        samples = []
        for t, psi, _ in probes:
            f_c, f_d = eval_F_split(context.preset.rhs, t, psi)
            samples.append((t, psi.collocation_at([0.0])[0], (f_c + f_d).coefficients))
        return samples

    def handle(self, context: RunContext) -> bool:
        preset = context.preset
        rhs = preset.rhs
        settings = context.config.probes
        count = int(settings.get('count', PROBE_COUNT))
        mutations = int(settings.get('mutations', MUTATION_COUNT))
        knots = int(settings.get('knots', PROBE_KNOTS))
        probes = random_probes(preset, context.rng, count, knots)
        pairs = [((probes[k][0], probes[k][1]), (probes[k + 1][0], probes[k + 1][1])) for k in range(count - 1)]

        reports = []
        multi = len(rhs.terms) > 1
        for index, term in enumerate(rhs.terms):
            suffix = f"[{index}]" if multi else ''
            measure = term.measure
            reports.append(check_variation_bound(measure, [(t, psi) for t, psi, _ in probes],
                                                 name=f"variation_bound{suffix}"))
            reports.append(merge_reports(f"ignore_interval{suffix}", [
                check_ignore_interval(measure, t, psi, mutations, context.rng) for t, psi, _ in probes
            ]))
            reports.append(check_variation_lipschitz(measure, pairs, name=f"variation_lipschitz{suffix}"))
            reports.append(probe_point_map(term.p, preset.grid,
                                           [(t, psi.collocation_at([0.0])[0]) for t, psi, _ in probes],
                                           name=f"point_map{suffix}"))
            if len(measure.atoms) == 1:
                reports.append(self._perturbation_report(context, measure, term.p, probes, suffix))

        if preset.normalized:
            labelled = {f"g[{k}]": term.measure for k, term in enumerate(rhs.terms)}
            reports.append(check_normalization(labelled, [(t, psi) for t, psi, _ in probes]))

        samples = self._outer_samples(context, probes)
        reports.append(linear_growth_probe(rhs, preset.grid, samples))
        radius = settings.get('radius')
        if radius is None:
            radius = max(max(float(np.max(np.abs(u))), float(np.max(np.abs(v)))) for _, u, v in samples)
        same_time = [((t, u, v), (t, u2, v2)) for (t, u, v), (_, u2, v2) in zip(samples, samples[1:])]
        reports.append(check_outer_lipschitz(rhs.outer, preset.grid, radius, same_time))

        if rhs.density_only:
            neighbours = [(t, psi, self._neighbour(context, psi, PERTURBATION_MAGNITUDE)) for t, psi, _ in probes]
            surrogate_radius = max(max(a.sup_norm(), b.sup_norm()) for _, a, b in neighbours)
            reports.append(lipschitz_surrogate_probe(rhs, settings.get('radius', surrogate_radius), neighbours))

        if preset.constraint is not None and preset.constraint.kind == 'nonneg_cone':
            n_boundary = int(settings.get('boundary_probes', BOUNDARY_PROBE_COUNT))
            boundary = random_probes(preset, context.rng, n_boundary, knots, zero_head=True)
            reports.append(quasipositivity_probe(rhs, boundary))

        self.writer.write_reports('checks', reports)
        flagged = [report.name for report in reports if report.flagged]
        if flagged:
            logger.warning(f"Checks flagged: {flagged}")
        return not flagged

    def _perturbation_report(self, context: RunContext, measure, p, probes, suffix: str) -> CheckReport:
        rows = []
        for index, (t, psi, _) in enumerate(probes):
            other = self._neighbour(context, psi, PERTURBATION_MAGNITUDE)
            result = fd_perturbation_bound(measure, p, t, psi, other, atom_moduli(measure, psi))
            rows.append({'probe': index, 't': t, 'delta': result.delta, 'measured': result.measured,
                         'bound': result.bound, 'passed': result.holds})
        failed = [row['probe'] for row in rows if not row['passed']]
        worst = max((row['measured'] / row['bound'] for row in rows if row['bound'] > 0), default=0.0)
        message = f"max measured/bound {worst:.6g}"
        if failed:
            message += f"; exceeded at probes {failed}"
        return CheckReport(f"discrete_perturbation{suffix}", not failed, rows=rows, message=message)
