import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from planopt.preference import (
    Criterion,
    PreferenceCurve,
    PreferenceModel,
    WeightScheme,
    aggregate,
    imap_fitness,
    normalize_scores,
)
from planopt.sampling import ValidationError

from _oracles import least_squares_representative


def _model(weights=(0.5, 0.5), objectives=("cost", "duration")):
    curve = PreferenceCurve.linear([(0.0, 100.0), (100.0, 0.0)])
    return PreferenceModel(
        [
            Criterion("s", objective, curve, weight)
            for objective, weight in zip(objectives, weights)
        ]
    )


class TestPreferenceCurve:
    def test_mound_curve_peaks_at_target(self):
        curve = PreferenceCurve.beta_pert(60.0, 90.0, 150.0)
        assert curve(90.0) == 100.0
        assert curve(75.0) < 100.0
        assert curve(120.0) < 100.0

    def test_mound_curve_asymmetry(self):
        curve = PreferenceCurve.beta_pert(966.0, 1466.0, 1566.0)
        # The short late side decays much faster than the long early side.
        assert curve(1466.0 + 50.0) < curve(1466.0 - 50.0)

    def test_linear_midpoint(self):
        curve = PreferenceCurve.linear([(10.0, 100.0), (20.0, 0.0)])
        assert curve(15.0) == pytest.approx(50.0)

    def test_outside_support_clamps_to_zero(self):
        curve = PreferenceCurve.linear([(10.0, 100.0), (20.0, 0.0)])
        assert curve(9.0) == 0.0
        assert curve(21.0) == 0.0
        curve = PreferenceCurve.beta_pert(0.0, 5.0, 10.0)
        assert curve(-0.5) == 0.0 and curve(10.5) == 0.0

    def test_edge_mode_supported(self):
        falling = PreferenceCurve.beta_pert(0.0, 0.0, 10.0)
        assert falling(0.0) == 100.0
        rising = PreferenceCurve.beta_pert(0.0, 10.0, 10.0)
        assert rising(10.0) == 100.0

    def test_vector_evaluation(self):
        curve = PreferenceCurve.linear([(0.0, 0.0), (10.0, 100.0)])
        out = curve(np.array([-1.0, 5.0, 10.0, 11.0]))
        assert np.allclose(out, [0.0, 50.0, 100.0, 0.0])

    def test_rejects_bad_knots(self):
        with pytest.raises(ValidationError):
            PreferenceCurve.linear([(0.0, 100.0)])
        with pytest.raises(ValidationError):
            PreferenceCurve.linear([(0.0, 100.0), (0.0, 0.0)])
        with pytest.raises(ValidationError):
            PreferenceCurve.linear([(0.0, 120.0), (1.0, 0.0)])


class TestNormalizeScores:
    def test_two_point_column(self):
        z = normalize_scores(np.array([[0.0], [100.0]]))
        assert np.allclose(z, [[-1.0], [1.0]])

    def test_constant_column_maps_to_zero(self):
        z = normalize_scores(np.array([[70.0], [70.0], [70.0]]))
        assert np.array_equal(z, np.zeros((3, 1)))

    def test_three_point_column_pinned(self):
        z = normalize_scores(np.array([[10.0], [20.0], [60.0]]))
        assert np.allclose(z.ravel(), [-0.9258, -0.4629, 1.3887], atol=1e-3)

    def test_single_alternative_rejected(self):
        with pytest.raises(ValidationError, match="two alternatives"):
            normalize_scores(np.array([[50.0, 60.0]]))

    @given(
        scores=arrays(
            float,
            st.tuples(st.integers(2, 12), st.integers(1, 6)),
            elements=st.floats(0, 100, width=32).map(float),
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_columns_standardized_or_zero(self, scores):
        z = normalize_scores(scores)
        for j in range(scores.shape[1]):
            column = z[:, j]
            if scores[:, j].std() == 0.0:
                assert np.array_equal(column, np.zeros_like(column))
            else:
                assert abs(column.mean()) < 1e-9
                assert abs(column.std() - 1.0) < 1e-9


class TestAggregate:
    def test_single_criterion_identity(self):
        z = np.array([[0.3], [-1.2], [0.9]])
        assert np.allclose(aggregate(z, [1.0]), z.ravel())

    def test_symmetric_weights_cancel(self):
        assert aggregate(np.array([[1.0, -1.0]]), [0.5, 0.5])[0] == pytest.approx(0.0)

    def test_weighted_rows(self):
        z = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert np.allclose(aggregate(z, [0.7, 0.3]), [0.4, -0.4])

    def test_weight_sum_enforced(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            aggregate(np.array([[1.0, 0.0]]), [0.7, 0.4])

    @given(
        scores=arrays(
            float,
            st.tuples(st.integers(2, 20), st.integers(1, 8)),
            elements=st.floats(0, 100, width=32).map(float),
        ),
        raw_weights=arrays(float, 8, elements=st.floats(0.0625, 1, width=32).map(float)),
    )
    @settings(max_examples=40, deadline=None)
    def test_closed_form_equals_numeric_minimizer(self, scores, raw_weights):
        weights = raw_weights[: scores.shape[1]]
        weights = weights / weights.sum()
        z = normalize_scores(scores)
        closed = aggregate(z, weights)
        for i in range(min(3, z.shape[0])):
            numeric = least_squares_representative(z[i], weights)
            assert abs(closed[i] - numeric) < 1e-6


class TestWeightScheme:
    def test_offshore_weight_table(self):
        # Global 0.5 / 0.5, locals 0.60/0.40 and 0.70/0.30: effective weights
        # (0.30, 0.20, 0.35, 0.15) summing to exactly 1.
        scheme = WeightScheme(
            stakeholders={"provider": 0.5, "contractor": 0.5},
            local={
                "provider": {"duration": 0.60, "emissions": 0.40},
                "contractor": {"cost": 0.70, "utilisation": 0.30},
            },
        )
        effective = {(s, o): w for s, o, w in scheme.effective()}
        assert effective[("provider", "duration")] == pytest.approx(0.30)
        assert effective[("provider", "emissions")] == pytest.approx(0.20)
        assert effective[("contractor", "cost")] == pytest.approx(0.35)
        assert effective[("contractor", "utilisation")] == pytest.approx(0.15)
        assert sum(effective.values()) == pytest.approx(1.0)

    def test_global_sum_enforced(self):
        with pytest.raises(ValidationError, match="global"):
            WeightScheme(stakeholders={"a": 0.6, "b": 0.6})

    def test_local_sum_enforced(self):
        with pytest.raises(ValidationError, match="local weights"):
            WeightScheme(stakeholders={"a": 1.0}, local={"a": {"cost": 0.5}})

    def test_unknown_stakeholder_rejected(self):
        with pytest.raises(ValidationError, match="unknown stakeholder"):
            WeightScheme(stakeholders={"a": 1.0}, local={"b": {"cost": 1.0}})


class TestImapFitness:
    def test_identical_alternatives_all_zero(self):
        model = _model()
        rows = [{"cost": 30.0, "duration": 8.0}] * 4
        assert np.array_equal(imap_fitness(rows, model), np.zeros(4))

    def test_dominating_alternative_wins(self):
        model = _model(weights=(0.6, 0.4))
        rows = [
            {"cost": 10.0, "duration": 20.0},
            {"cost": 50.0, "duration": 20.0},
        ]
        scores = imap_fitness(rows, model)
        assert scores[0] > scores[1]

    def test_missing_objective_reported(self):
        with pytest.raises(ValidationError, match="missing objective"):
            imap_fitness([{"cost": 1.0}, {"cost": 2.0}], _model())

    def test_translation_invariance(self):
        model = _model()
        rows = [{"cost": 10.0, "duration": 30.0}, {"cost": 40.0, "duration": 5.0},
                {"cost": 25.0, "duration": 18.0}]
        base = imap_fitness(rows, model)
        shifted = [{k: v + 7.0 for k, v in row.items()} for row in rows]
        # Shifting every objective moves preference points linearly, and the
        # z-scores absorb any affine change per criterion.
        assert np.allclose(base, imap_fitness(shifted, model), atol=1e-9)


class TestAffineInvariance:
    @given(
        scores=arrays(
            float,
            st.tuples(st.integers(2, 16), st.integers(2, 6)),
            elements=st.floats(1, 99, width=32).map(float),
        ),
        alpha=st.floats(0.1, 10),
        beta=st.floats(-50, 50),
        column=st.integers(0, 5),
    )
    @settings(max_examples=60, deadline=None)
    def test_affine_transform_of_one_criterion(self, scores, alpha, beta, column):
        column %= scores.shape[1]
        weights = np.full(scores.shape[1], 1.0 / scores.shape[1])
        base = aggregate(normalize_scores(scores), weights)
        transformed = scores.copy()
        transformed[:, column] = alpha * transformed[:, column] + beta
        other = aggregate(normalize_scores(transformed), weights)
        assert np.allclose(base, other, atol=1e-9)
        top = np.sort(base)
        if len(top) < 2 or top[-1] - top[-2] > 1e-9:
            # The ranking is determinate: its argmax must survive the transform.
            assert int(np.argmax(base)) == int(np.argmax(other))

    def test_dominance_with_nonzero_weight(self):
        scores = np.array([[80.0, 60.0], [70.0, 60.0], [50.0, 40.0]])
        weights = np.array([0.5, 0.5])
        out = aggregate(normalize_scores(scores), weights)
        assert out[0] > out[1] > out[2]
