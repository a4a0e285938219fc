"""
Tests for the assembled right-hand side and its hypothesis probes
"""
import numpy as np
import pytest

from delaysim.models.delay_kernel import DelayAtom, DelayDensity, DelayMeasure, IgnoreInterval, PointMap
from delaysim.models.history import Segment
from delaysim.models.presets import random_segment, uniform_state
from delaysim.models.rhs import (DelayRHS, DelayTerm, OuterMap, check_outer_lipschitz, eval_B,
                                 eval_B_collocation, eval_F_split, linear_growth_probe,
                                 lipschitz_surrogate_probe, quasipositivity_probe)
from delaysim.utils.errors import InputError


def constant_delay_rhs(outer, p=None, delay=1.0):
    measure = DelayMeasure((DelayAtom.constant(delay),), None, 1.0, IgnoreInterval(delay), delay_horizon=1.0)
    return DelayRHS.single(measure, p or PointMap.identity(), outer)


def test_b_reduces_to_delayed_value(point):
    psi = Segment(0.0, 1.0, [-1.0, 0.0], [[[0.7]], [[5.0]]], point)
    b = eval_B(constant_delay_rhs(OuterMap.affine(0.0)), 0.0, psi)
    assert b.coefficients[0, 0] == 0.7


def test_zero_outer_map(point, rng):
    psi = random_segment(point, 1, 1.0, rng)
    assert np.all(eval_B(constant_delay_rhs(OuterMap.zero()), 0.0, psi).coefficients == 0)


def test_nicholson_on_constant_history(point):
    c, p1, d = 0.8, 3.0, 0.4
    psi = Segment.constant(point, uniform_state(point, [c]), 0.0, 1.0)
    rhs = constant_delay_rhs(OuterMap.nicholson(d, p1 / np.e), PointMap.nicholson(p1))
    assert eval_B(rhs, 0.0, psi).coefficients[0, 0] == pytest.approx(p1 * c * np.exp(-c) - d * c, rel=1e-14)


def test_b_matches_split_components(neumann, rng):
    measure = DelayMeasure((DelayAtom.constant(0.6, 0.5),), DelayDensity.constant(0.5, 1.0), 1.0,
                           IgnoreInterval(0.5), delay_horizon=1.0)
    rhs = DelayRHS.single(measure, PointMap.nicholson(2.0, neumann.volume), OuterMap.affine(0.3))
    psi = random_segment(neumann, 1, 1.0, rng)
    f_c, f_d = eval_F_split(rhs, 0.0, psi)
    head = psi.collocation_at([0.0])[0]
    expected = rhs.outer(0.0, head, (f_c + f_d).coefficients)
    assert np.array_equal(eval_B_collocation(rhs, 0.0, psi), expected)


def test_terms_sum_into_f(point, rng):
    first = DelayMeasure((DelayAtom.constant(1.0),), None, 1.0, delay_horizon=1.0)
    second = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), delay_horizon=1.0)
    rhs = DelayRHS((DelayTerm(first, PointMap.identity()), DelayTerm(second, PointMap.identity())),
                   OuterMap.affine(0.0))
    psi = Segment(0.0, 1.0, [-1.0, 0.0], [[[1.0]], [[3.0]]], point)
    f_c, f_d = eval_F_split(rhs, 0.0, psi)
    assert f_d.coefficients[0, 0] == 1.0
    assert f_c.coefficients[0, 0] == pytest.approx(2.0)
    assert rhs.has_atoms
    assert rhs.min_ignore_interval(0.0, 1.0) == 1.0


def test_rhs_needs_a_horizon():
    with pytest.raises(InputError):
        DelayRHS((), OuterMap.zero())
    assert DelayRHS((), OuterMap.zero(), 2.0).delay_horizon == 2.0


def test_delay_lipschitz_from_declared_constants():
    measure = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), max_variation=1.0, density_lipschitz=0.5,
                           delay_horizon=1.0)
    rhs = DelayRHS.single(measure, PointMap.linear_map(2.0), OuterMap.affine(0.0))
    # L_p M_Vg + L_Vgc (C1 R + C2)
    assert rhs.delay_lipschitz(3.0) == pytest.approx(2.0 + 0.5 * 6.0)


def test_linear_growth_on_linear_outer(point, rng):
    rhs = constant_delay_rhs(OuterMap.affine(2.0))
    probes = [(0.0, rng.standard_normal((1, 1)), rng.standard_normal((1, 1))) for _ in range(20)]
    report = linear_growth_probe(rhs, point, probes)
    assert report.passed
    assert report.value <= 1.0


def test_nicholson_growth_constants(point, rng):
    p1, d = 4.0, 0.5
    p = PointMap.nicholson(p1)
    rhs = constant_delay_rhs(OuterMap.nicholson(d, p.growth_const), p)
    probes = []
    for _ in range(20):
        u = rng.uniform(0.0, 10.0, (1, 1))
        probes.append((0.0, u, p(0.0, rng.uniform(0.0, 10.0, (1, 1)))))
    assert linear_growth_probe(rhs, point, probes).passed


def test_quadratic_outer_breaks_linear_growth(point):
    outer = OuterMap(lambda t, u, v: u * u, lambda R: 2 * R, growth=(lambda t: 1.0, lambda t: 0.0), kind='square')
    rhs = constant_delay_rhs(outer)
    report = linear_growth_probe(rhs, point, [(0.0, np.array([[10.0]]), np.array([[0.0]]))])
    assert report.flagged


def test_growth_without_metadata_is_not_applicable(point):
    rhs = constant_delay_rhs(OuterMap.lotka_volterra([1.0]))
    report = linear_growth_probe(rhs, point, [])
    assert not report.applicable


def test_quasipositivity(point, rng):
    probes = [(0.0, random_segment(point, 1, 1.0, rng, zero_head_species=0), 0) for _ in range(10)]
    nicholson = constant_delay_rhs(OuterMap.nicholson(1.0, 2.0 / np.e), PointMap.nicholson(2.0))
    assert quasipositivity_probe(nicholson, probes).passed

    draining = constant_delay_rhs(OuterMap.constant([-1.0]))
    report = quasipositivity_probe(draining, probes)
    assert report.flagged
    assert report.value == -1.0


def test_quasipositivity_for_lotka_volterra(point, rng):
    measure = DelayMeasure((DelayAtom.constant(1.0),), None, 1.0, delay_horizon=1.0)
    rhs = DelayRHS((DelayTerm(measure, PointMap.species_coupling(0, 0, 1.0)),
                    DelayTerm(measure, PointMap.species_coupling(1, 0, 0.5)),
                    DelayTerm(measure, PointMap.species_coupling(0, 1, 0.5)),
                    DelayTerm(measure, PointMap.species_coupling(1, 1, 1.0))),
                   OuterMap.lotka_volterra([1.0, 1.0]))
    probes = [(0.0, random_segment(point, 2, 1.0, rng, zero_head_species=k % 2), k % 2) for k in range(10)]
    assert quasipositivity_probe(rhs, probes).passed


def test_quasipositivity_rejects_bad_probe(point, rng):
    rhs = constant_delay_rhs(OuterMap.affine(0.0))
    psi = random_segment(point, 1, 1.0, rng)
    with pytest.raises(InputError):
        quasipositivity_probe(rhs, [(0.0, psi, 0)])


def test_lipschitz_surrogate_on_density_only(point, rng):
    measure = DelayMeasure(density=DelayDensity.constant(1.0, 1.0), max_variation=1.0, delay_horizon=1.0)
    rhs = DelayRHS.single(measure, PointMap.identity(), OuterMap.affine(0.0))
    pairs = [(0.0, random_segment(point, 1, 1.0, rng), random_segment(point, 1, 1.0, rng)) for _ in range(10)]
    report = lipschitz_surrogate_probe(rhs, 10.0, pairs)
    assert report.passed
    assert report.value == pytest.approx(2.0)
    assert len(report.rows) == 10


def test_lipschitz_surrogate_skips_atoms(point):
    report = lipschitz_surrogate_probe(constant_delay_rhs(OuterMap.affine(0.0)), 1.0, [])
    assert not report.applicable


def test_outer_lipschitz(point, rng):
    outer = OuterMap.lotka_volterra([2.0])
    samples = [(0.0, rng.uniform(0.0, 1.0, (1, 1)), rng.uniform(0.0, 1.0, (1, 1))) for _ in range(10)]
    pairs = list(zip(samples, samples[1:]))
    assert check_outer_lipschitz(outer, point, 1.0, pairs).passed


def test_outer_lipschitz_needs_time_modulus_across_times(point):
    sample = (0.0, np.ones((1, 1)), np.ones((1, 1)))
    later = (1.0, np.ones((1, 1)), np.ones((1, 1)))
    with pytest.raises(InputError):
        check_outer_lipschitz(OuterMap.affine(1.0), point, 1.0, [(sample, later)])

    table = OuterMap.custom_table([0.0, 1.0], [0.0, 0.0], [1.0, 1.0], [0.0, 2.0])
    assert check_outer_lipschitz(table, point, 1.0, [(sample, later)]).passed
