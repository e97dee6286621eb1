import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planopt.objectives import (
    ControlMeasure,
    ControlObjectiveParams,
    MeasureSamples,
    completion_deltas,
    completion_deltas_batch,
    control_cost,
    control_nuisance,
    offshore_objectives,
    sample_measure_impacts,
)
from planopt.offshore import FleetRealization, OffshoreParams, VesselActivity, VesselSpec
from planopt.sampling import RngHandle, ThreePointEstimate, ValidationError


def tpe(a, m=None, b=None):
    if m is None:
        m = b = a
    return ThreePointEstimate(a, m, b)


def measure(mid=1, activity=1, capacity=50.0, cost=120_000.0, nuisance=1.0, eta=0.5):
    return ControlMeasure(
        id=mid,
        description=f"measure {mid}",
        activity=activity,
        capacity=tpe(capacity),
        cost=tpe(cost),
        nuisance=tpe(nuisance),
        eta=eta,
    )


def params(target=1466.0, **kwargs):
    return ControlObjectiveParams(target_duration=target, **kwargs)


SPECS = (
    VesselSpec("small-ocv", 0, 3, 8, 47_000.0, 0.7, 30.0, tpe(1.2, 1.5, 1.8)),
    VesselSpec("large-ocv", 0, 2, 12, 55_000.0, 0.8, 40.0, tpe(1.4, 1.6, 2.0)),
    VesselSpec("barge", 0, 2, 16, 35_000.0, 0.5, 35.0, tpe(2.0, 2.5, 3.0)),
)


def fleet_with(name, days, anchors=108, completion=None):
    return FleetRealization(
        completion=completion if completion is not None else days,
        vessels=(VesselActivity(name, 0, anchors, days),),
    )


def offshore_params(mass=10.0):
    return OffshoreParams(
        anchors_total=108,
        anchors_per_turbine=3,
        anchor_mass=mass,
        installation=tpe(0.8, 1.0, 1.2),
    )


class TestCompletionDeltas:
    def test_on_target(self):
        assert completion_deltas(1466.0, 1466.0) == (0.0, 0.0)

    def test_four_days_late(self):
        assert completion_deltas(1470.0, 1466.0) == (4.0, 0.0)

    def test_sixty_six_days_early(self):
        assert completion_deltas(1400.0, 1466.0) == (0.0, 66.0)

    @given(delta=st.floats(0, 5000), target=st.floats(1, 5000))
    @settings(max_examples=200, deadline=None)
    def test_mutual_exclusion(self, delta, target):
        d1, d2 = completion_deltas(delta, target)
        assert d1 * d2 == 0.0
        assert d1 >= 0.0 and d2 >= 0.0

    def test_batch_matches_scalar(self):
        deltas = np.array([1400.0, 1466.0, 1500.0])
        d1, d2 = completion_deltas_batch(deltas, 1466.0)
        assert np.array_equal(d1, [0.0, 0.0, 34.0])
        assert np.array_equal(d2, [66.0, 0.0, 0.0])


class TestControlCost:
    def _samples(self, capacity, cost, nuisance=1.0):
        return MeasureSamples(
            capacity=np.array([capacity]),
            cost=np.array([cost]),
            nuisance=np.array([nuisance]),
        )

    def test_no_allocation_on_target_is_free(self):
        out = control_cost(
            [0], [measure()], {1: 0.0}, self._samples(50.0, 120_000.0), (0.0, 0.0), params()
        )
        assert out == 0.0

    def test_fully_used_measure_costs_its_sample(self):
        out = control_cost(
            [1], [measure()], {1: 50.0}, self._samples(50.0, 120_000.0), (0.0, 0.0), params()
        )
        assert out == pytest.approx(120_000.0)

    def test_half_used_measure_interpolates_with_eta(self):
        # eta = 0.5: 120k * (0.5 + 0.5 * 0.5) = 90k.
        out = control_cost(
            [1], [measure()], {1: 25.0}, self._samples(50.0, 120_000.0), (0.0, 0.0), params()
        )
        assert out == pytest.approx(90_000.0)

    def test_eta_one_full_use_reduces_to_plain_sum(self):
        measures = [measure(mid=1, eta=1.0), measure(mid=2, activity=2, eta=1.0)]
        samples = MeasureSamples(
            capacity=np.array([50.0, 30.0]),
            cost=np.array([120_000.0, 80_000.0]),
            nuisance=np.array([1.0, 1.0]),
        )
        out = control_cost(
            [1, 1], measures, {1: 50.0, 2: 30.0}, samples, (0.0, 0.0), params()
        )
        assert out == pytest.approx(200_000.0)

    def test_eta_zero_is_one_off_expense(self):
        out = control_cost(
            [1], [measure(eta=0.0)], {1: 5.0}, self._samples(50.0, 120_000.0),
            (0.0, 0.0), params(),
        )
        assert out == pytest.approx(120_000.0)

    def test_delay_penalty_and_early_reward(self):
        p = params(delay_penalty_per_day=10_000.0, early_reward_per_day=2_000.0)
        late = control_cost([0], [measure()], {1: 0.0}, self._samples(50.0, 1.0), (4.0, 0.0), p)
        early = control_cost([0], [measure()], {1: 0.0}, self._samples(50.0, 1.0), (0.0, 10.0), p)
        assert late == pytest.approx(40_000.0)
        assert early == pytest.approx(-20_000.0)


class TestControlNuisance:
    def _samples(self, nuisances):
        n = len(nuisances)
        return MeasureSamples(
            capacity=np.ones(n), cost=np.ones(n), nuisance=np.array(nuisances, dtype=float)
        )

    def test_no_allocation_on_target(self):
        out = control_nuisance([0, 0], self._samples([2.0, 3.0]), (0.0, 0.0), params())
        assert out == 0.0

    def test_full_allocation_reaches_scale(self):
        out = control_nuisance([1, 1], self._samples([2.0, 3.0]), (0.0, 0.0), params())
        assert out == pytest.approx(10.0)

    def test_delay_adjustment_adds_on_top(self):
        p = params(nuisance_delay_rate=0.1)
        out = control_nuisance([1, 1], self._samples([2.0, 3.0]), (10.0, 0.0), p)
        assert out == pytest.approx(11.0)

    def test_zero_total_nuisance_defined_as_zero(self):
        out = control_nuisance([1], self._samples([0.0]), (0.0, 0.0), params())
        assert out == 0.0

    @given(bits=st.lists(st.integers(0, 1), min_size=3, max_size=3))
    @settings(max_examples=32, deadline=None)
    def test_bounded_by_scale_absent_delay_terms(self, bits):
        out = control_nuisance(bits, self._samples([2.0, 0.5, 7.0]), (0.0, 0.0), params())
        assert 0.0 <= out <= 10.0


class TestSampleMeasureImpacts:
    def test_degenerate_triples_are_exact(self):
        measures = [measure(capacity=51.0, cost=48_000.0, nuisance=0.0)]
        samples = sample_measure_impacts(measures, RngHandle(1).generator())
        assert samples.capacity[0] == 51.0
        assert samples.cost[0] == 48_000.0
        assert samples.nuisance[0] == 0.0

    def test_samples_lie_in_support(self):
        m = ControlMeasure(
            id=4, description="permitting", activity=8,
            capacity=tpe(43.0, 51.0, 57.0), cost=tpe(44_000.0, 48_000.0, 50_000.0),
            nuisance=tpe(0.0, 0.0, 0.0),
        )
        rng = RngHandle(2).generator()
        for _ in range(200):
            s = sample_measure_impacts([m], rng)
            assert 43.0 <= s.capacity[0] <= 57.0
            assert 44_000.0 <= s.cost[0] <= 50_000.0

    def test_eta_outside_unit_interval_rejected(self):
        with pytest.raises(ValidationError, match="eta"):
            measure(eta=1.5)


class TestOffshoreObjectives:
    def test_barge_emissions_and_day_cost(self):
        # One barge active 20 days: 35 t/day and 35 kEUR/day.
        fleet = fleet_with("barge", 20.0)
        out = offshore_objectives(fleet, (0, 0, 1), offshore_params(), SPECS)
        assert out["emissions"] == pytest.approx(700.0)
        assert out["vessel_cost"] == pytest.approx(700_000.0)
        assert out["duration"] == pytest.approx(20.0)

    def test_single_small_ocv_utilisation(self):
        fleet = fleet_with("small-ocv", 10.0)
        out = offshore_objectives(fleet, (1, 0, 0), offshore_params(), SPECS)
        assert out["utilisation"] == pytest.approx(0.7)

    def test_barge_only_utilisation(self):
        fleet = fleet_with("barge", 10.0)
        out = offshore_objectives(fleet, (0, 0, 1), offshore_params(), SPECS)
        assert out["utilisation"] == pytest.approx(0.5)

    def test_anchor_cost_component(self):
        # (815 * 10 + 40000) * 108 = 5,200,200 EUR at a 10 t anchor mass.
        fleet = fleet_with("barge", 0.0, completion=0.0)
        out = offshore_objectives(fleet, (0, 0, 1), offshore_params(mass=10.0), SPECS)
        assert out["cost"] - out["vessel_cost"] == pytest.approx(5_200_200.0)

    def test_cost_linear_in_active_days(self):
        p = offshore_params()
        short = offshore_objectives(fleet_with("barge", 10.0), (0, 0, 1), p, SPECS)
        long = offshore_objectives(fleet_with("barge", 30.0), (0, 0, 1), p, SPECS)
        assert (long["vessel_cost"] / short["vessel_cost"]) == pytest.approx(3.0)
        assert (long["emissions"] / short["emissions"]) == pytest.approx(3.0)

    def test_utilisation_decreases_with_any_extra_vessel(self):
        p = offshore_params()
        base = offshore_objectives(fleet_with("barge", 1.0), (0, 0, 1), p, SPECS)
        more = offshore_objectives(fleet_with("barge", 1.0), (1, 0, 1), p, SPECS)
        assert more["utilisation"] < base["utilisation"]
