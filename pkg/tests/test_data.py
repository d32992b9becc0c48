import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from artifact import PolynomialModel, SensorDataset, polyfit, select_degree, sensor_stats
from artifact.errors import InsufficientDataError, SingularFitError, UnderdeterminedFitError

from conftest import TABLE1


def test_table2_means_and_true_value(case_stats):
    assert np.round(case_stats.per_sensor_mean, 3).tolist() == [10.702, 10.704, 10.980, 10.624, 10.758, 10.672]
    assert round(case_stats.true_value, 3) == 10.740


def test_table2_deviations_are_population(case_stats):
    assert case_stats.system_std == pytest.approx(0.1146, abs=5e-4)
    assert case_stats.per_sensor_std == pytest.approx([0.27, 0.40, 0.31, 0.30, 0.42, 0.32], abs=5e-3)
    sample = TABLE1.std(axis=0, ddof=1)
    assert not np.allclose(sample, [0.27, 0.40, 0.31, 0.30, 0.42, 0.32], atol=5e-3)


def test_identical_readings():
    stats = sensor_stats(SensorDataset(("a", "b", "c"), np.full((4, 3), 7.5)))
    assert stats.per_sensor_std.tolist() == [0.0, 0.0, 0.0]
    assert stats.system_std == 0.0
    assert stats.true_value == 7.5


@pytest.mark.parametrize(
    "readings",
    [np.ones((1, 3)), np.ones((3, 1)), np.array([[1.0, np.nan], [1.0, 2.0]]), np.array([[1.0, -2.0], [1.0, 2.0]])],
)
def test_dataset_rejects_bad_shapes(readings):
    with pytest.raises(InsufficientDataError):
        SensorDataset(tuple(f"s{i}" for i in range(readings.shape[1])), readings)


readings_st = arrays(float, st.tuples(st.integers(2, 6), st.integers(2, 6)), elements=st.floats(0.5, 50))


@settings(max_examples=60)
@given(readings_st, st.randoms())
def test_stats_permutation_invariant(readings, rnd):
    cols = list(range(readings.shape[1]))
    rnd.shuffle(cols)
    base = sensor_stats(SensorDataset(tuple(map(str, range(len(cols)))), readings))
    perm = sensor_stats(SensorDataset(tuple(map(str, cols)), readings[:, cols]))
    assert perm.per_sensor_mean.tolist() == base.per_sensor_mean[cols].tolist()
    assert perm.true_value == pytest.approx(base.true_value, rel=1e-14)
    assert perm.system_std == pytest.approx(base.system_std, rel=1e-9, abs=1e-12)


@settings(max_examples=60)
@given(readings_st, st.sampled_from([0.5, 2.0, 4.0, 0.25]))
def test_stats_scale_by_power_of_two(readings, c):
    ids = tuple(map(str, range(readings.shape[1])))
    base = sensor_stats(SensorDataset(ids, readings))
    scaled = sensor_stats(SensorDataset(ids, readings * c))
    assert scaled.per_sensor_mean.tolist() == (base.per_sensor_mean * c).tolist()
    assert scaled.per_sensor_std.tolist() == (base.per_sensor_std * c).tolist()
    assert scaled.true_value == base.true_value * c
    assert scaled.system_std == base.system_std * c


@given(readings_st, st.floats(0.1, 10))
def test_stats_scale_general(readings, c):
    ids = tuple(map(str, range(readings.shape[1])))
    base = sensor_stats(SensorDataset(ids, readings))
    scaled = sensor_stats(SensorDataset(ids, readings * c))
    assert scaled.true_value == pytest.approx(base.true_value * c, rel=1e-12)
    assert scaled.system_std == pytest.approx(base.system_std * c, rel=1e-9, abs=1e-12)


def test_polyfit_line_through_two_points():
    model = polyfit([(0, 1), (1, 3)], 1)
    assert model.coefficients == pytest.approx((1.0, 2.0), abs=1e-12)
    assert model.degree == 1


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_polyfit_constant_data(degree):
    pts = [(x, 4.2) for x in (0.1, 0.4, 0.5, 0.9, 1.3)]
    coeffs = polyfit(pts, degree).coefficients
    assert coeffs[0] == pytest.approx(4.2, abs=1e-9)
    assert np.allclose(coeffs[1:], 0, atol=1e-9)


def test_polyfit_case_study_line(case_stats):
    x = case_stats.per_sensor_std
    y = case_stats.per_sensor_mean
    slope = np.sum((x - x.mean()) * (y - y.mean())) / np.sum((x - x.mean()) ** 2)
    intercept = y.mean() - slope * x.mean()
    model = polyfit(case_stats.points, 1)
    assert model.coefficients == pytest.approx((intercept, slope), rel=1e-12)
    assert 10.70 <= intercept <= 10.76 and 0.02 <= slope <= 0.06


def test_polyfit_errors():
    with pytest.raises(UnderdeterminedFitError):
        polyfit([(0, 1), (1, 2)], 2)
    with pytest.raises(SingularFitError):
        polyfit([(1, 1), (1, 2), (1, 3)], 1)


@settings(max_examples=60)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=4),
    st.lists(st.floats(-2, 2), min_size=8, max_size=15, unique=True),
)
def test_refit_recovers_coefficients(coeffs, xs):
    xs = sorted(xs)
    if min(np.diff(xs)) < 0.05:
        return
    model = PolynomialModel(tuple(coeffs))
    refit = polyfit([(x, model(x)) for x in xs], model.degree)
    assert np.allclose(refit.coefficients, coeffs, rtol=1e-9, atol=1e-9)


@settings(max_examples=60)
@given(st.integers(0, 4), st.integers(0, 10_000))
def test_polyfit_matches_reference_lstsq(degree, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.2, 0.5, size=8))
    y = rng.uniform(9, 12, size=8)
    ours = polyfit(list(zip(x, y)), degree)
    ref, *_ = np.linalg.lstsq(np.vander(x, degree + 1, increasing=True), y, rcond=None)
    assert np.allclose(ours(x), np.vander(x, degree + 1, increasing=True) @ ref, rtol=1e-9)


def test_degree_selection_case_study(case_stats):
    sel = select_degree(case_stats.points, 5, case_stats.true_value)
    assert sel.chosen_degree == 1
    errors = [sel.total_error_by_degree[d] for d in range(1, 6)]
    assert errors == sorted(errors)
    # the published error at degree 1 is 0.012
    assert errors[0] == pytest.approx(0.012, abs=1e-3)


def test_degree_selection_caps_at_points_minus_one(case_stats):
    sel = select_degree(case_stats.points, 6, case_stats.true_value)
    assert max(sel.total_error_by_degree) == 5


def test_degree_selection_collinear_tie_breaks_low():
    pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]
    sel = select_degree(pts, 2, 2.0)
    assert sel.chosen_degree == 1


def test_degree_selection_recovers_quadratic_by_residual():
    quad = PolynomialModel((1.0, -2.0, 3.0))
    pts = [(x, quad(x)) for x in np.linspace(0, 2, 7)]
    sel = select_degree(pts, 3, float(np.mean([p[1] for p in pts])), min_degree=0, metric="residual")
    assert sel.chosen_degree == 2
    # brute force: every degree's residual, lowest zero-residual degree is 2
    res = {d: np.abs(polyfit(pts, d)(np.array(pts)[:, 0]) - np.array(pts)[:, 1]).sum() for d in range(4)}
    assert res[0] > 1e-3 and res[1] > 1e-3 and res[2] < 1e-9


def test_degree_selection_records_singular_degrees():
    pts = [(0.0, 1.0), (0.0, 1.5), (1.0, 2.0), (1.0, 2.5)]
    sel = select_degree(pts, 3, 1.75)
    assert sel.chosen_degree == 1
    assert 2 in sel.excluded and 3 in sel.excluded


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_chosen_degree_residual_not_above_lower_degrees(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.2, 0.5, size=6)
    y = rng.uniform(10, 11, size=6)
    pts = list(zip(x, y))
    sel = select_degree(pts, 4, float(y.mean()), min_degree=0)
    ssr = lambda d: float(np.sum((polyfit(pts, d)(x) - y) ** 2))  # noqa: E731
    chosen = ssr(sel.chosen_degree)
    assert all(chosen <= ssr(d) * (1 + 1e-9) + 1e-15 for d in range(sel.chosen_degree))


def test_model_evaluation():
    model = PolynomialModel((1.0, 2.0, 3.0))
    assert model(2.0) == 17.0
    assert model(np.array([0.0, 1.0])).tolist() == [1.0, 6.0]
    with pytest.raises(ValueError):
        PolynomialModel(())
    with pytest.raises(ValueError):
        PolynomialModel((1.0, float("nan")))
