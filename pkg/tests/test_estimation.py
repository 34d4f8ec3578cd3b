"""System assembly, constant and windowed fits, noise and sweeps."""

import numpy as np
import pytest

from artifact import (
    ConstantSchedule,
    EstimationWindow,
    NoiseSpec,
    ParameterPartition,
    ShapeMismatch,
    SimulationConfig,
    StackedSystem,
    SweepSpec,
    TimeSeries,
    TooFewPoints,
    UnderDetermined,
    add_noise,
    assemble_from_series,
    estimate_constant,
    estimate_time_varying,
    eval_rhs,
    lotka_volterra,
    relative_error_metrics,
    run_sweep,
    simulate,
    sir,
    solve_ols,
    subsample_noise_table,
)

LV_OMEGA = np.array([0.7, 1.3, 1.1, 0.9])
SIR_OMEGA = np.array([0.5, 1.0 / 3.0])


def test_assemble_single_index(sir_trajectory):
    system = assemble_from_series(sir(1.0), sir_trajectory, [10])
    assert system.matrix.shape == (3, 2)
    span = sir_trajectory.times[11] - sir_trajectory.times[9]
    expected = (sir_trajectory.states[11] - sir_trajectory.states[9]) / span
    np.testing.assert_array_equal(system.rhs, expected)


def test_assemble_span_shape(sir_trajectory):
    system = assemble_from_series(sir(1.0), sir_trajectory, EstimationWindow.span(1, 50))
    assert system.matrix.shape == (150, 2)
    assert system.rhs.shape == (150,)


def test_analytic_rhs_recovers_exactly(sir_trajectory):
    """With the true derivative on the right the fit is exact to roundoff."""
    model = sir(1.0)
    blocks_matrix = []
    blocks_rhs = []
    for i in range(0, 60):
        state = sir_trajectory.states[i]
        blocks_matrix.append(model.build_matrix(state, float(i)))
        blocks_rhs.append(eval_rhs(model, state, SIR_OMEGA))
    system = StackedSystem(np.vstack(blocks_matrix), np.concatenate(blocks_rhs))
    estimate = solve_ols(system)
    assert np.abs(estimate.values - SIR_OMEGA).max() < 1e-10


def test_assemble_mode_errors(sir_trajectory):
    model = sir(1.0)
    with pytest.raises(ShapeMismatch):
        assemble_from_series(model, sir_trajectory, [3, 5, 7], derivative="full")
    with pytest.raises(ValueError):
        assemble_from_series(model, sir_trajectory, [3, 4], derivative="spline")
    with pytest.raises(TooFewPoints):
        assemble_from_series(model, sir_trajectory, [0, 1, 2])


def test_window_constructors(sir_trajectory):
    np.testing.assert_array_equal(EstimationWindow.span(2, 5).indices, [2, 3, 4, 5])
    interior = EstimationWindow.interior(sir_trajectory)
    np.testing.assert_array_equal(interior.indices, np.arange(1, 79))
    with pytest.raises(ShapeMismatch):
        EstimationWindow([])
    with pytest.raises(TooFewPoints):
        EstimationWindow.interior(TimeSeries([0.0, 1.0], [[1.0], [2.0]]))


def test_window_nesting(sir_trajectory):
    """Stacking two adjacent windows reproduces the combined system."""
    model = sir(1.0)
    whole = assemble_from_series(model, sir_trajectory, EstimationWindow.span(1, 40))
    left = assemble_from_series(model, sir_trajectory, EstimationWindow.span(1, 20))
    right = assemble_from_series(model, sir_trajectory, EstimationWindow.span(21, 40))
    np.testing.assert_array_equal(
        whole.matrix, np.vstack([left.matrix, right.matrix])
    )
    np.testing.assert_array_equal(whole.rhs, np.concatenate([left.rhs, right.rhs]))


def test_constant_recovery_sir_daily(sir_trajectory):
    estimate = estimate_constant(
        sir(1.0), sir_trajectory, EstimationWindow.span(0, 49), derivative="full"
    )
    assert abs(estimate.values[0] - 0.5) <= 1e-3
    assert abs(estimate.values[1] - 1.0 / 3.0) <= 2e-3


def test_constant_recovery_lv_subsample(lv_trajectory):
    idx = np.arange(100) * 10
    coarse = TimeSeries(lv_trajectory.times[idx], lv_trajectory.states[idx])
    estimate = estimate_constant(lotka_volterra(), coarse)
    rel = np.abs((estimate.values - LV_OMEGA) / LV_OMEGA)
    assert rel.max() < 0.01


def test_lv_resimulation_tracks_truth(lv_trajectory):
    # 40 points over [0, 10] leaves an O(dt^2) differencing bias near 1%
    idx = np.arange(40) * 25
    coarse = TimeSeries(lv_trajectory.times[idx], lv_trajectory.states[idx])
    estimate = estimate_constant(lotka_volterra(), coarse)
    rel = np.abs((estimate.values - LV_OMEGA) / LV_OMEGA)
    assert rel.max() < 0.02
    config = SimulationConfig(
        0.0, 10.0, 10.0 / 999.0, np.array([1.0, 1.0]), ConstantSchedule(estimate.values)
    )
    resim = simulate(lotka_volterra(), config)
    deviation = np.abs(resim.states - lv_trajectory.states) / np.abs(lv_trajectory.states)
    assert deviation.max() < 0.10
    assert deviation.mean() < 0.05


def test_known_parameter_passes_through(sir_trajectory):
    partition = ParameterPartition.from_known(2, {1: 1.0 / 3.0})
    estimate = estimate_constant(sir(1.0), sir_trajectory, partition=partition)
    assert estimate.values[1] == 1.0 / 3.0


def test_time_varying_underdetermined(lv_trajectory):
    with pytest.raises(UnderDetermined):
        estimate_time_varying(lotka_volterra(), lv_trajectory, 1)


def test_time_varying_on_constant_data():
    """Every windowed estimate agrees with the constant truth, any width."""
    config = SimulationConfig(
        0.0, 40.0, 0.25, np.array([0.9999, 1e-4, 0.0]), ConstantSchedule(SIR_OMEGA)
    )
    series = simulate(sir(1.0), config)
    expected_counts = {2: 160, 5: 157, 14: 148, 56: 106}
    for width, count in expected_counts.items():
        results = estimate_time_varying(sir(1.0), series, width)
        assert len(results) == count
        worst = max(np.abs(e.values - SIR_OMEGA).max() for _, e in results)
        assert worst < 1e-3


def test_time_varying_attributes_window_end():
    config = SimulationConfig(
        0.0, 40.0, 0.25, np.array([0.9999, 1e-4, 0.0]), ConstantSchedule(SIR_OMEGA)
    )
    series = simulate(sir(1.0), config)
    results = estimate_time_varying(sir(1.0), series, 5)
    assert results[0][0] == series.times[4]
    assert results[-1][0] == series.times[-1]


def test_add_noise_zero_epsilon_identity(lv_trajectory):
    noisy = add_noise(lv_trajectory, NoiseSpec(0.0))
    np.testing.assert_array_equal(noisy.states, lv_trajectory.states)
    assert noisy.states is not lv_trajectory.states


def test_add_noise_scale():
    series = TimeSeries(np.arange(100000.0), np.ones(100000))
    noisy = add_noise(series, NoiseSpec(0.05, seed=3))
    ratio = np.std(noisy.states - series.states) / 0.05
    assert abs(ratio - 1.0) < 0.02


def test_add_noise_deterministic():
    series = TimeSeries(np.arange(1000.0), np.ones(1000))
    a = add_noise(series, NoiseSpec(0.05, seed=9))
    b = add_noise(series, NoiseSpec(0.05, seed=9))
    c = add_noise(series, NoiseSpec(0.05, seed=10))
    np.testing.assert_array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_noise_spec_rejects_negative_epsilon():
    with pytest.raises(ValueError):
        NoiseSpec(-0.1)


def test_metrics_worked_examples():
    m = relative_error_metrics([[2.0, 2.0]], [[1.0, 1.0]])
    np.testing.assert_allclose(m.signed_mean, [0.5, 0.5])
    m = relative_error_metrics([[1.0]], [[1.5]])
    np.testing.assert_allclose(m.signed_mean, [-0.5])
    m = relative_error_metrics([[0.7, 1.3]], [[0.7, 1.3]])
    np.testing.assert_allclose(m.signed_mean, [0.0, 0.0])
    np.testing.assert_allclose(m.absolute_mean, [0.0, 0.0])


def test_metrics_skips_zero_truth():
    m = relative_error_metrics([[0.0, 2.0]], [[1.0, 1.0]])
    np.testing.assert_array_equal(m.skipped, [1, 0])
    assert np.isnan(m.signed_mean[0])
    assert m.signed_mean[1] == pytest.approx(0.5)


def test_metrics_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        relative_error_metrics([[1.0, 2.0]], [[1.0]])


def test_noise_table_default_lv(lv_trajectory):
    table = subsample_noise_table(lotka_volterra(), lv_trajectory, LV_OMEGA, seed=100)
    assert table.shape == (4, 4, 4)
    # densest noiseless column: every percent error under 1
    assert table[:, 3, 0].max() < 1.0
    # sparse noisy corner sits near the expected order of magnitude
    assert 3.5 <= table[0, 3, 3] <= 14.0
    # more points never hurt at zero noise
    assert np.all(np.diff(table[:, :, 0], axis=1) < 0)


def test_noise_table_deterministic(lv_trajectory):
    a = subsample_noise_table(
        lotka_volterra(), lv_trajectory, LV_OMEGA, points=(5, 10), noise_levels=(0.05,),
        draws=3, seed=4,
    )
    b = subsample_noise_table(
        lotka_volterra(), lv_trajectory, LV_OMEGA, points=(5, 10), noise_levels=(0.05,),
        draws=3, seed=4,
    )
    np.testing.assert_array_equal(a, b)


def test_sweep_zero_draw_recorded_not_fatal():
    spec = SweepSpec(
        domain=((0.0, 0.0),),
        sample_count=3,
        fixed=ParameterPartition.from_known(4, {1: 1.3, 2: 1.1, 3: 0.9}),
    )
    config = SimulationConfig(
        0.0, 10.0, 10.0 / 999.0, np.array([1.0, 1.0]), ConstantSchedule(LV_OMEGA)
    )
    result = run_sweep(lotka_volterra(), spec, config)
    assert len(result.failures) == 3
    assert "zero parameter draw" in result.failures[0][1]
    assert result.fraction_below(1.0, "max") == 0.0
    assert np.all(np.isnan(result.max_errors))


def test_sweep_deterministic_and_accurate():
    spec = SweepSpec(
        domain=((0.1, 0.9), (0.5, 1.5), (0.7, 1.5), (0.3, 1.2)),
        sample_count=5,
        fixed=ParameterPartition.all_unknown(4),
        seed=8,
    )
    config = SimulationConfig(
        0.0, 10.0, 10.0 / 999.0, np.array([1.0, 1.0]), ConstantSchedule(LV_OMEGA)
    )
    a = run_sweep(lotka_volterra(), spec, config)
    b = run_sweep(lotka_volterra(), spec, config)
    np.testing.assert_array_equal(a.max_errors, b.max_errors)
    assert not a.failures
    assert np.nanmax(a.max_errors) < 1e-3


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(((0.5, 0.1),), 10, ParameterPartition.all_unknown(1))
    with pytest.raises(ShapeMismatch):
        SweepSpec(((0.1, 0.5),), 10, ParameterPartition.all_unknown(2))
    with pytest.raises(ValueError):
        SweepSpec(((0.1, 0.5),), 0, ParameterPartition.all_unknown(1))
