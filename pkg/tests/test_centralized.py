from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from mrcap.centralized import (
    build_allocation,
    expand_solution,
    kkt_residual,
    solve_reduced,
)
from mrcap.errors import InfeasibleError, InvalidParameterError
from mrcap.generator import GeneratorConfig, generate
from mrcap.model import derive_class_params

from .conftest import make_instance, make_spec
from .oracles import grid_search_reduced, random_feasible_allocations, reduced_objective


def contended(instance, spare_fraction=0.5):
    lo, up = instance.r_low_total, instance.r_up_total
    return instance.with_capacity(lo + spare_fraction * (up - lo))


class TestExpandSolution:
    def test_worked_example(self):
        d = derive_class_params(make_spec(), 1.0)
        psi, sM, sR = expand_solution(10.0, d)
        assert psi == pytest.approx(1.45711, abs=5e-6)
        assert sM == pytest.approx(11.7157, abs=5e-5)
        assert sR == pytest.approx(8.2843, abs=5e-5)
        # both eliminated constraints are tight at these values
        assert make_spec().A / (sM * psi) + make_spec().B / (sR * psi) == pytest.approx(
            100.0, rel=1e-12
        )
        assert sM / 2 + sR / 2 == pytest.approx(10.0, rel=1e-12)

    def test_bounds_map_to_exact_concurrency_limits(self):
        d = derive_class_params(make_spec(), 1.0)
        assert expand_solution(d.rUp, d)[0] == d.psiLow
        assert expand_solution(d.rLow, d)[0] == d.psiUp

    def test_rejects_nonpositive(self):
        d = derive_class_params(make_spec(), 1.0)
        with pytest.raises(InvalidParameterError):
            expand_solution(0.0, d)


class TestSolveReduced:
    def test_abundant_capacity_single_class(self):
        inst = make_instance([make_spec()], R=200.0)
        report = solve_reduced(inst)
        d = inst.classes[0].derived
        row = report.allocation.per_class[0]
        assert row.r == pytest.approx(d.rUp, rel=1e-12)
        assert report.allocation.penalty_cost == 0.0
        assert report.allocation.objective == pytest.approx(1.0 * d.rUp, rel=1e-12)
        assert report.capacity_dual == 0.0

    def test_capacity_pinned_at_minimum(self):
        spec = make_spec()
        d = derive_class_params(spec, 1.0)
        inst = make_instance([spec], R=d.rLow)
        report = solve_reduced(inst)
        assert report.allocation.per_class[0].r == pytest.approx(d.rLow, rel=1e-12)
        assert report.allocation.penalty_cost == pytest.approx(
            spec.m * (spec.Hup - spec.Hlow), rel=1e-12
        )

    def test_interior_single_class_closed_form(self):
        # small m keeps the stationary point strictly inside the box
        spec = make_spec(m=15.0)
        d = derive_class_params(spec, 1.0)
        target = math.sqrt(d.alpha * d.K / 1.0)
        assert d.rLow < target < d.rUp
        inst = make_instance([spec], R=1000.0)
        report = solve_reduced(inst)
        assert report.capacity_dual == 0.0
        assert report.allocation.per_class[0].r == pytest.approx(target, rel=1e-12)
        assert report.kkt <= 1e-12

    def test_two_class_contended_matches_grid_oracle(self):
        specs = [make_spec(id="a"), make_spec(id="b", A=4000, B=900, m=27000)]
        inst = contended(make_instance(specs, R=1.0), 0.5)
        assert inst.r_low_total < inst.cluster.R < inst.r_up_total
        report = solve_reduced(inst)
        oracle = grid_search_reduced(inst, step_frac=1e-3)
        assert report.allocation.objective <= oracle * (1 + 1e-8)
        assert report.allocation.objective == pytest.approx(oracle, rel=1e-3)

    def test_three_class_contended_matches_grid_oracle(self):
        specs = [
            make_spec(id="a"),
            make_spec(id="b", A=4000, B=900, m=27000, Hup=6, Hlow=4),
            make_spec(id="c", A=20000, B=2500, m=18000, Hup=15, Hlow=12),
        ]
        inst = contended(make_instance(specs, R=1.0), 0.4)
        report = solve_reduced(inst)
        oracle = grid_search_reduced(inst, step_frac=1e-3)
        assert report.allocation.objective <= oracle * (1 + 1e-8)
        assert report.allocation.objective == pytest.approx(oracle, rel=1e-3)

    def test_infeasible_raises(self):
        with pytest.raises(InfeasibleError):
            solve_reduced(make_instance([make_spec()], R=10.0))

    def test_boundary_capacity_returns_minimums(self):
        spec = make_spec()
        d = derive_class_params(spec, 1.0)
        inst = make_instance([spec, make_spec(id="b")], R=2 * d.rLow)
        report = solve_reduced(inst)
        for row in report.allocation.per_class:
            assert row.r == pytest.approx(d.rLow, rel=1e-12)
        assert report.kkt <= 1e-8


class TestKktResidual:
    def test_solver_output_is_stationary(self):
        for seed in range(5):
            inst = contended(generate(GeneratorConfig(n=8, seed=seed)), 0.5)
            report = solve_reduced(inst)
            assert report.kkt <= 1e-8
            assert kkt_residual(report, inst) == report.kkt

    def test_perturbed_solution_is_not(self):
        inst = contended(generate(GeneratorConfig(n=8, seed=1)), 0.5)
        report = solve_reduced(inst)
        bumped = build_allocation(inst, [1.01 * c.r for c in report.allocation.per_class])
        worse = dataclasses.replace(report, allocation=bumped)
        assert kkt_residual(worse, inst) > 1e-6

    def test_complementarity_on_active_capacity(self):
        inst = contended(generate(GeneratorConfig(n=8, seed=2)), 0.5)
        report = solve_reduced(inst)
        if report.capacity_dual > 0:
            total = sum(c.r for c in report.allocation.per_class)
            assert abs(total - inst.cluster.R) <= 1e-9 * inst.cluster.R


class TestOptimalityProperties:
    def test_beats_random_feasible_points(self):
        rng = np.random.default_rng(7)
        for seed in range(3):
            inst = contended(generate(GeneratorConfig(n=10, seed=seed)), 0.5)
            report = solve_reduced(inst)
            points = random_feasible_allocations(inst, 1000, rng)
            values = reduced_objective(inst, points)
            assert report.allocation.objective <= values.min() * (1 + 1e-9)

    def test_objective_non_increasing_in_capacity(self):
        inst = generate(GeneratorConfig(n=10, seed=4))
        lo, up = inst.r_low_total, inst.r_up_total
        values = []
        for frac in np.linspace(0.05, 1.3, 12):
            values.append(
                solve_reduced(
                    inst.with_capacity(lo + frac * (up - lo))
                ).allocation.objective
            )
        for earlier, later in zip(values, values[1:]):
            assert later <= earlier * (1 + 1e-9)

    def test_eliminated_constraints_tight_on_output(self):
        inst = contended(generate(GeneratorConfig(n=10, seed=5)), 0.5)
        report = solve_reduced(inst)
        for planned, row in zip(inst.classes, report.allocation.per_class):
            s, d = planned.spec, planned.derived
            deadline_lhs = s.A / (row.sM * row.psi) + s.B / (row.sR * row.psi)
            assert deadline_lhs == pytest.approx(-d.E, rel=1e-9)
            assert row.sM / s.cM + row.sR / s.cR == pytest.approx(row.r, rel=1e-9)
