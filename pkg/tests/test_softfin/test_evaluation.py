"""
Unit tests for `softfin.evaluation` module.
"""

from unittest.mock import patch

import numpy as np
import pytest

from softfin.errors import EvaluationError, NonFiniteError
from softfin.evaluation import (
    COMPARE_COLUMNS,
    OVERALL,
    Comparison,
    ComparisonRow,
    TransferRow,
    compare_controllers,
    decisions_within,
    read_comparison,
    read_summaries,
    read_trace,
    reference_label,
    run_evaluation,
    summarize_forces,
    transfer_report,
    write_comparison,
    write_summaries,
    write_trace,
    write_transfer,
)
from softfin.plant import SAMPLE_PERIOD
from softfin.rl.environment import SurrogateEnvironment
from softfin.rl.policy import PolicyCheckpoint, PolicyNet, RandomActor
from softfin.rl.ppo import PPOConfig
from softfin.rl.training import DEFAULT_GRID_POINTS, GridBank, train_grid


class FaultyActor(RandomActor):
    """
    Random commands until the n-th decision, which fails.
    """

    def __init__(self, fail_at):
        self.fail_at = fail_at
        self.decisions = 0

    def act(self, observation, state, mode="sample", rng=None):
        self.decisions += 1
        if self.decisions > self.fail_at:
            raise NonFiniteError("actor head is nan", layer="actor")
        return super().act(observation, state, mode, rng)


@pytest.fixture(name="bank")
def fixture_bank():
    bank = GridBank()
    for index, point in enumerate(DEFAULT_GRID_POINTS):
        policy = PolicyNet.build(k=0, hidden=2, seed=index)
        bank.add(point, PolicyCheckpoint(policy, reference=point, seed=index))
    return bank


class TestSummarizeForces:
    def test_Should_report_zero_error_When_force_sits_on_reference(self):
        forces = np.tile([2.0, -1.0], (600, 1))

        summary = summarize_forces(forces, (2.0, -1.0), rewards=[-0.1, -0.3], seed=4)

        assert summary.x_error == pytest.approx(0.0)
        assert summary.y_error == pytest.approx(0.0)
        assert summary.x_std == pytest.approx(0.0)
        assert summary.mean_reward == pytest.approx(-0.2)
        assert summary.duration == pytest.approx(6.0)
        assert summary.reference == (2.0, -1.0)
        assert summary.seed == 4

    def test_Should_average_axis_errors_When_offset_is_constant(self):
        forces = np.tile([2.5, 0.0], (400, 1))

        summary = summarize_forces(forces, (2.0, 1.0))

        assert summary.x_error == pytest.approx(0.5)
        assert summary.y_error == pytest.approx(1.0)
        assert summary.mean_error == pytest.approx(0.75)

    def test_Should_separate_raw_and_smoothed_spread_When_force_alternates(self):
        fx = np.where(np.arange(1000) % 2 == 0, 1.0, -1.0)
        forces = np.column_stack([fx, np.zeros(1000)])

        summary = summarize_forces(forces, (0.0, 0.0))

        assert summary.x_raw_std == pytest.approx(1.0)
        assert summary.x_std < 0.1
        assert summary.y_raw_std == 0.0

    def test_Should_keep_first_thirty_seconds_When_run_is_longer(self):
        forces = np.tile([2.0, 0.0], (4000, 1))
        forces[3000:] += 5.0
        rewards = [-0.1] * 90 + [-5.0] * 30

        summary = summarize_forces(forces, (2.0, 0.0), rewards)
        whole = summarize_forces(forces, (2.0, 0.0), rewards, max_ticks=None)

        assert summary.x_error == pytest.approx(0.0)
        assert summary.duration == pytest.approx(30.0)
        assert summary.mean_reward == pytest.approx(-0.1)
        assert whole.x_error > 1.0
        assert whole.duration == pytest.approx(40.0)

    def test_Should_use_given_window_When_averaging(self):
        fx = np.where(np.arange(1000) % 2 == 0, 1.0, -1.0)
        forces = np.column_stack([fx, np.zeros(1000)])

        summary = summarize_forces(forces, (0.0, 0.0), window=1)

        assert summary.x_std == pytest.approx(1.0)
        assert summary.x_error == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "ticks, decisions",
        [(0, 0), (32, 0), (33, 1), (66, 2), (99, 2), (100, 3), (3000, 90), (3033, 91)],
    )
    def test_Should_count_whole_decisions_When_ticks_are_given(self, ticks, decisions):
        assert decisions_within(ticks) == decisions


class TestRunEvaluation:
    def test_Should_run_thirty_seconds_When_default_steps_are_used(self):
        summary, trajectory = run_evaluation(RandomActor(), None, (2.0, 0.0), seed=0)

        assert summary.duration == pytest.approx(30.0)
        assert trajectory.ticks == 3000
        assert np.isfinite(summary.x_error)

    def test_Should_summarize_thirty_seconds_When_run_is_longer(self):
        summary, trajectory = run_evaluation(RandomActor(), None, (2.0, 0.0), 0, 120)

        assert trajectory.ticks == 4000
        assert summary.duration == pytest.approx(30.0)

    def test_Should_reproduce_run_When_seed_repeats(self):
        first, _ = run_evaluation(RandomActor(), None, (1.0, 1.0), 3, 9)
        second, _ = run_evaluation(RandomActor(), None, (1.0, 1.0), 3, 9)

        assert first == second

    def test_Should_accept_two_seconds_When_six_steps_are_requested(self):
        summary, _ = run_evaluation(RandomActor(), None, (1.0, 0.0), 0, 6)

        assert summary.duration == pytest.approx(2.0)

    @pytest.mark.parametrize("steps", [0, 5])
    def test_Should_raise_When_run_is_shorter_than_two_seconds(self, steps):
        with pytest.raises(EvaluationError, match="shorter than"):
            run_evaluation(RandomActor(), None, (1.0, 0.0), 0, n_control_steps=steps)

    def test_Should_attach_partial_trace_When_controller_faults(self):
        with pytest.raises(EvaluationError, match="stopped after 0.66 s") as error:
            run_evaluation(FaultyActor(fail_at=2), None, (1.0, 0.0), 0)

        assert len(error.value.partial_trace) == 2
        assert isinstance(error.value.__cause__, NonFiniteError)

    def test_Should_never_touch_surrogate_When_evaluating(self):
        with patch.object(SurrogateEnvironment, "advance") as advance:
            with patch.object(SurrogateEnvironment, "reset") as reset:
                run_evaluation(RandomActor(), None, (2.0, 0.0), 0, 6)

        advance.assert_not_called()
        reset.assert_not_called()


class TestFiles:
    def test_Should_restore_trace_When_written_and_read(self, tmp_path):
        _, trajectory = run_evaluation(RandomActor(), None, (2.0, 0.0), 1, 6)
        path = str(tmp_path / "eval" / "trace.csv")

        write_trace(trajectory, path)
        trace = read_trace(path)

        assert len(trace) == 200
        np.testing.assert_allclose(trace.t, np.arange(200) * SAMPLE_PERIOD)
        np.testing.assert_array_equal(trace.theta, trajectory.theta_trace)
        np.testing.assert_array_equal(trace.fx, trajectory.force_trace[:, 0])
        np.testing.assert_array_equal(trace.commands, trajectory.command_trace)

    def test_Should_restore_summaries_When_written_and_read(self, tmp_path):
        summaries = [
            run_evaluation(RandomActor(), None, (2.0, 0.0), seed, n_control_steps=6)[0]
            for seed in (0, 1)
        ]
        path = str(tmp_path / "summary.csv")

        write_summaries(summaries, path)

        assert read_summaries(path) == summaries

    def test_Should_recompute_summary_When_trace_is_read_back(self, tmp_path):
        summary, trajectory = run_evaluation(RandomActor(), None, (2.0, -1.0), 4, 9)
        path = str(tmp_path / "trace.csv")

        write_trace(trajectory, path)
        trace = read_trace(path)
        forces = np.column_stack([trace.fx, trace.fy])
        again = summarize_forces(forces, (2.0, -1.0), trajectory.rewards, seed=4)

        assert again.x_error == pytest.approx(summary.x_error)
        assert again.y_error == pytest.approx(summary.y_error)
        assert again.x_std == pytest.approx(summary.x_std)
        assert again.y_std == pytest.approx(summary.y_std)
        assert again.duration == pytest.approx(summary.duration)


class TestCompareControllers:
    def test_Should_tabulate_each_reference_and_overall_mean_When_compared(self, bank):
        comparison = compare_controllers(
            RandomActor(), bank, DEFAULT_GRID_POINTS, seeds=[0, 1], n_control_steps=6
        )

        assert len(comparison.rows) == 7
        assert [row.label for row in comparison.rows[:2]] == ["(1, -1)", "(2, -1)"]
        assert comparison.overall.label == OVERALL
        assert set(comparison.ordering) == {0, 1}
        assert len(comparison.summaries["single"]) == 12
        assert len(comparison.summaries["grid"]) == 12

    def test_Should_average_rows_When_overall_mean_is_taken(self, bank):
        comparison = compare_controllers(
            RandomActor(), bank, DEFAULT_GRID_POINTS[:2], seeds=[0], n_control_steps=6
        )

        per_reference = np.array([row.grid for row in comparison.rows[:2]])
        np.testing.assert_allclose(comparison.overall.grid, per_reference.mean(axis=0))

    def test_Should_flag_ordering_per_seed_When_grid_is_compared_to_single(self, bank):
        comparison = compare_controllers(
            RandomActor(), bank, DEFAULT_GRID_POINTS[:2], [0, 1], n_control_steps=6
        )
        summaries = comparison.summaries

        for seed, holds in comparison.ordering.items():
            single = [s.x_error for s in summaries["single"] if s.seed == seed]
            grid = [s.x_error for s in summaries["grid"] if s.seed == seed]
            assert holds == (np.mean(grid) <= np.mean(single))

    def test_Should_compare_overall_x_error_When_ordering_is_read(self):
        rows = [ComparisonRow(OVERALL, (0.5, 0.1, 0.2, 0.1), (0.3, 0.1, 0.4, 0.1))]

        assert Comparison(rows, {}, {}).ordering_holds
        rows[0].grid = (0.6, 0.1, 0.1, 0.1)
        assert not Comparison(rows, {}, {}).ordering_holds

    def test_Should_restore_table_When_written_and_read(self, tmp_path, bank):
        comparison = compare_controllers(
            RandomActor(), bank, DEFAULT_GRID_POINTS, seeds=[0], n_control_steps=6
        )
        path = str(tmp_path / "compare.csv")

        write_comparison(comparison, path)
        restored = read_comparison(path)

        with open(path, "r", encoding="utf-8") as f:
            assert f.readline().strip() == ",".join(COMPARE_COLUMNS)
        assert [row.label for row in restored.rows] == [
            row.label for row in comparison.rows
        ]
        for expected, actual in zip(comparison.rows, restored.rows):
            assert actual.single == expected.single
            assert actual.grid == expected.grid
        assert restored.ordering == comparison.ordering


class TestTransfer:
    def test_Should_report_each_grid_point_When_transfer_is_measured(
        self, tmp_path, bank, tiny_surrogate
    ):
        small = GridBank()
        for point in bank.points[:2]:
            small.add(point, bank[point])

        rows = transfer_report(small, tiny_surrogate, seeds=[0], n_control_steps=6)
        path = tmp_path / "transfer.csv"
        write_transfer(rows, str(path))

        assert [row.reference for row in rows] == small.points
        assert all(np.isfinite(row.plant_error) for row in rows)
        assert len(path.read_text(encoding="utf-8").splitlines()) == 3

    @pytest.mark.parametrize(
        "surrogate_error, plant_error, expected",
        [(0.2, 0.3, 1.5), (0.0, 0.0, 1.0), (0.0, 0.1, float("inf"))],
    )
    def test_Should_divide_plant_by_surrogate_error_When_ratio_is_taken(
        self, surrogate_error, plant_error, expected
    ):
        row = TransferRow((1.0, 0.0), surrogate_error, plant_error)

        assert row.ratio == pytest.approx(expected)

    def test_Should_format_compactly_When_reference_is_labelled(self):
        assert reference_label((2.0, -1.0)) == "(2, -1)"
        assert reference_label((1.5, 0.25)) == "(1.5, 0.25)"


@pytest.mark.slow
def test_Should_transfer_and_beat_random_baseline_When_grid_is_trained(
    desk_surrogate,
):
    points = [(2.0, 0.0), (1.0, 1.0)]
    seeds = [0, 1, 2]
    bank = train_grid(desk_surrogate, points, PPOConfig(), seed=0)

    rows = transfer_report(bank, desk_surrogate, seeds)

    assert [row.reference for row in rows] == points
    assert all(row.ratio <= 2.0 for row in rows)
    for point in points:
        policy = bank[point].policy
        grid_x = np.mean(
            [
                run_evaluation(policy, None, point, s, k=policy.k)[0].x_error
                for s in seeds
            ]
        )
        random_x = np.mean(
            [run_evaluation(RandomActor(), None, point, s)[0].x_error for s in seeds]
        )
        assert random_x >= grid_x
