from __future__ import annotations

import math

import pytest

from mrcap.errors import InfeasibleError, InvalidParameterError
from mrcap.generator import (
    CapacityRule,
    GeneratorConfig,
    ParameterRanges,
    apply_penalties,
    calibrate_penalties,
    generate,
    shrink,
)
from mrcap.io import instance_to_dict

from .conftest import make_instance, unit_k_spec

TABLE_BOUNDS = {
    "K": (0.86178, 1050.1135),
    "xiM": (0.19326, 3.53566),
    "xiR": (0.11608, 3.22694),
    "alpha": (300000.0, 9600000.0),
    "beta": (60000.0, 480000.0),
    "p": (14.284, 34812.0),
    "rUp": (4.3089, 21002.0),
    "rLow": (3.4471, 16802.0),
    "E": (-1368.0, -180.0),
}


class TestDeterminism:
    def test_same_seed_identical_instances(self):
        a = generate(GeneratorConfig(n=12, seed=42))
        b = generate(GeneratorConfig(n=12, seed=42))
        assert instance_to_dict(a) == instance_to_dict(b)

    def test_different_seeds_differ(self):
        a = generate(GeneratorConfig(n=12, seed=42))
        b = generate(GeneratorConfig(n=12, seed=43))
        assert instance_to_dict(a) != instance_to_dict(b)

    def test_growing_n_preserves_earlier_classes(self):
        small = generate(GeneratorConfig(n=5, seed=7))
        large = generate(GeneratorConfig(n=9, seed=7))
        for a, b in zip(small.classes, large.classes):
            assert a.spec == b.spec


class TestDrawRanges:
    def test_derived_values_stay_in_published_intervals(self):
        for seed in range(25):
            inst = generate(GeneratorConfig(n=20, seed=seed))
            assert 0.85344 <= inst.cluster.rhoBar <= 1.47246
            for c in inst.classes:
                d = c.derived
                for name, value in (
                    ("K", d.K),
                    ("xiM", d.xiM),
                    ("xiR", d.xiR),
                    ("alpha", d.alpha),
                    ("beta", d.beta),
                    ("p", d.p),
                    ("rUp", d.rUp),
                    ("rLow", d.rLow),
                    ("E", d.E),
                ):
                    lo, hi = TABLE_BOUNDS[name]
                    assert lo <= value <= hi, (name, value)

    def test_concurrency_floor_rule(self):
        for seed in range(10):
            inst = generate(GeneratorConfig(n=30, seed=seed))
            for c in inst.classes:
                assert c.spec.Hlow == math.floor(0.8 * c.spec.Hup)
                assert 4 <= c.spec.Hlow <= 16
        # the rule maps the range ends as published
        assert math.floor(0.8 * 20) == 16
        assert math.floor(0.8 * 5) == 4

    def test_bid_ceiling_always_covers_unit_cost(self):
        for seed in range(10):
            inst = generate(GeneratorConfig(n=30, seed=seed))
            for c in inst.classes:
                assert c.spec.rhoUp >= inst.cluster.rhoBar

    def test_profile_metadata_carried(self):
        inst = generate(GeneratorConfig(n=3, seed=0))
        profile = inst.classes[0].spec.raw_profile
        assert profile is not None
        assert 70 <= profile["nM"] <= 1120
        assert profile["nR"] == 64
        assert profile["Mavg"] == pytest.approx(0.8 * profile["Mmax"])


class TestCapacityRules:
    def test_multiple_of_full_demand(self):
        inst = generate(GeneratorConfig(n=8, seed=1, capacity=CapacityRule(multiple=1.1)))
        assert inst.cluster.R == pytest.approx(1.1 * inst.r_up_total, rel=1e-12)

    def test_explicit_capacity(self):
        rule = CapacityRule(multiple=None, explicit=1234.5)
        inst = generate(GeneratorConfig(n=8, seed=1, capacity=rule))
        assert inst.cluster.R == 1234.5

    def test_rule_requires_exactly_one_mode(self):
        with pytest.raises(InvalidParameterError):
            CapacityRule(multiple=1.1, explicit=10.0)
        with pytest.raises(InvalidParameterError):
            CapacityRule(multiple=None, explicit=None)

    def test_bad_config_rejected(self):
        with pytest.raises(InvalidParameterError):
            GeneratorConfig(n=0, seed=1)
        with pytest.raises(InvalidParameterError):
            GeneratorConfig(n=2, seed=1, ranges=ParameterRanges(A=(10.0, 5.0)))


class TestShrink:
    def test_identity_shrink(self):
        inst = generate(GeneratorConfig(n=6, seed=3))
        assert instance_to_dict(shrink(inst, 6))["classes"] == instance_to_dict(inst)["classes"]

    def test_prefix_kept_bit_exact_and_capacity_rescaled(self):
        inst = generate(GeneratorConfig(n=10, seed=3))
        small = shrink(inst, 4)
        assert small.n == 4
        for a, b in zip(small.classes, inst.classes):
            assert a.spec == b.spec
        assert small.cluster.R == pytest.approx(
            1.1 * sum(c.derived.rUp for c in small.classes), rel=1e-12
        )

    def test_rejects_growth(self):
        inst = generate(GeneratorConfig(n=4, seed=3))
        with pytest.raises(InvalidParameterError):
            shrink(inst, 5)

    def test_explicit_capacity_survives_shrinking(self):
        rule = CapacityRule(multiple=None, explicit=5000.0)
        inst = generate(GeneratorConfig(n=6, seed=3, capacity=rule))
        assert shrink(inst, 2).cluster.R == 5000.0


class TestPenaltyCalibration:
    def test_single_class_formula(self):
        # K=150 at unit cost 1.0: one job costs 150, so m = 15000
        spec = unit_k_spec("a", K=150.0, Hup=2, Hlow=1, m=999.0)
        inst = make_instance([spec], R=400.0, rhoBar=1.0)
        assert inst.classes[0].derived.K == pytest.approx(150.0, rel=1e-12)
        (m,) = calibrate_penalties(inst)
        assert m == pytest.approx(15000.0, rel=1e-9)

    def test_scales_with_unit_cost(self):
        spec = unit_k_spec("a", K=150.0)
        base = make_instance([spec], R=400.0, rhoBar=1.0)
        double = make_instance([spec], R=400.0, rhoBar=2.0)
        assert calibrate_penalties(double)[0] == pytest.approx(
            2 * calibrate_penalties(base)[0], rel=1e-9
        )

    def test_requires_room_for_full_concurrency(self):
        spec = unit_k_spec("a", K=150.0)  # rUp = 300
        inst = make_instance([spec], R=200.0)
        with pytest.raises(InfeasibleError):
            calibrate_penalties(inst)

    def test_apply_penalties_rederives(self):
        inst = generate(GeneratorConfig(n=4, seed=2, capacity=CapacityRule(multiple=1.2)))
        ms = calibrate_penalties(inst)
        rebuilt = apply_penalties(inst, ms)
        for c, m in zip(rebuilt.classes, ms):
            assert c.spec.m == m
            assert c.derived.alpha == pytest.approx(
                m * c.spec.Hup * c.spec.Hlow, rel=1e-12
            )
            assert c.derived.p == pytest.approx(m / c.derived.K, rel=1e-12)

    def test_provenance_recorded(self):
        inst = generate(GeneratorConfig(n=4, seed=2))
        assert inst.provenance["seed"] == 2
        assert inst.provenance["generatorVersion"] == "1"
        assert "PCG64" in inst.provenance["rng"]
        assert inst.provenance["capacityRule"] == {"multiple": 1.1}
