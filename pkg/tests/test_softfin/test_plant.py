"""
Unit tests for `softfin.plant` module.
"""

import math

import numpy as np
import pytest

from softfin.errors import ConfigurationError, PlantFault
from softfin.plant import (
    ANGLE_LIMIT,
    STOP_MARGIN,
    FinPlant,
    MotorCommand,
    PlantParams,
    PlantState,
    fin_force,
    plant_reset,
    plant_step,
)


@pytest.fixture(name="quiet_params")
def fixture_quiet_params():
    return PlantParams(sigma=0.0)


def _run(params, commands, seed=0):
    plant = FinPlant(params)
    plant.reset(seed)
    thetas, forces = [], []
    for command in commands:
        sample = plant.step(command)
        thetas.append(plant.state.theta_m)
        forces.append((sample.fx, sample.fy))
    return np.array(thetas), np.array(forces)


def _sweep(amplitude, speed, hold):
    commands = []
    for target in (amplitude, -0.3 * amplitude, 0.8 * amplitude):
        commands.append(MotorCommand(target, speed))
        commands.extend([None] * hold)
    return commands


class TestMotorCommand:
    @pytest.mark.parametrize(
        "angle, omega",
        [(ANGLE_LIMIT + 0.01, 2.0), (0.0, 0.5), (0.0, math.pi + 0.01), (-2.0, 1.5)],
    )
    def test_Should_raise_configuration_error_When_command_is_out_of_range(
        self, angle, omega
    ):
        with pytest.raises(ConfigurationError):
            MotorCommand(angle, omega)

    def test_Should_use_slowest_speed_When_hold_is_built(self):
        assert MotorCommand.hold(0.3).as_tuple() == (0.3, 1.0)


class TestPlantParams:
    @pytest.mark.parametrize(
        "kwargs",
        [{"c_n": 0.0}, {"tau": -1.0}, {"a_max": 0.0}, {"sigma": -0.1}, {"dt": 0.02}],
    )
    def test_Should_raise_configuration_error_When_parameter_is_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            PlantParams(**kwargs)

    def test_Should_change_fingerprint_When_a_parameter_changes(self):
        assert PlantParams().fingerprint() == PlantParams().fingerprint()
        assert PlantParams().fingerprint() != PlantParams(c_n=0.9).fingerprint()


class TestPlantReset:
    def test_Should_start_at_rest_When_reset(self):
        state = plant_reset(PlantParams(), seed=3)
        assert state.theta_m == 0.0 and state.theta_f == 0.0
        assert state.omega_m == 0.0 and state.omega_f == 0.0
        assert state.command == MotorCommand.hold(0.0)

    def test_Should_measure_only_noise_When_holding_at_rest(self):
        params = PlantParams()
        _, forces = _run(params, [MotorCommand.hold(0.0)] * 50, seed=4)
        assert np.all(np.abs(forces) < 5.0 * params.sigma)

    def test_Should_measure_exactly_zero_When_holding_without_noise(self, quiet_params):
        _, forces = _run(quiet_params, [MotorCommand.hold(0.0)] * 10)
        np.testing.assert_array_equal(forces, 0.0)

    def test_Should_repeat_trajectory_When_seeds_are_equal(self):
        commands = _sweep(1.0, 2.5, 80)
        first = _run(PlantParams(), commands, seed=11)
        second = _run(PlantParams(), commands, seed=11)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])


class TestPlantStep:
    def test_Should_mirror_forces_When_commands_are_negated(self, quiet_params):
        commands = _sweep(1.2, 2.0, 60)
        mirrored = [
            None
            if c is None
            else MotorCommand(-c.target_angle, c.target_angular_velocity)
            for c in commands
        ]
        theta, forces = _run(quiet_params, commands)
        theta_m, forces_m = _run(quiet_params, mirrored)
        np.testing.assert_allclose(theta_m, -theta, atol=1e-12)
        # fx = m sin(theta) is even under the mirror, fy = -m cos(theta) is odd.
        np.testing.assert_allclose(forces_m[:, 0], forces[:, 0], atol=1e-9)
        np.testing.assert_allclose(forces_m[:, 1], -forces[:, 1], atol=1e-9)

    def test_Should_give_pure_drag_When_fin_turns_at_one_radian_per_second(self):
        fx, fy = fin_force(0.0, 1.0, 0.0, PlantParams(sigma=0.0))
        assert fx == pytest.approx(0.0)
        assert fy == pytest.approx(-0.8)

    def test_Should_double_forces_When_drag_coefficient_doubles(self):
        commands = _sweep(1.0, 3.0, 50)
        _, single = _run(PlantParams(c_n=0.8, c_a=0.0, sigma=0.0), commands)
        _, double = _run(PlantParams(c_n=1.6, c_a=0.0, sigma=0.0), commands)
        np.testing.assert_array_equal(double, 2.0 * single)

    @pytest.mark.parametrize(
        "target, speed", [(1.4, math.pi), (-0.7, 1.0), (0.05, 3.0)]
    )
    def test_Should_not_overshoot_target_When_moving(self, quiet_params, target, speed):
        theta, _ = _run(quiet_params, [MotorCommand(target, speed)] + [None] * 300)
        tolerance = quiet_params.a_max * quiet_params.dt**2
        if target > 0:
            assert np.max(theta) <= target + tolerance
        else:
            assert np.min(theta) >= target - tolerance
        assert theta[-1] == pytest.approx(target)

    def test_Should_stay_within_mechanical_stop_When_driven_to_the_limit(
        self, quiet_params
    ):
        commands = [MotorCommand(ANGLE_LIMIT, math.pi)] + [None] * 200
        theta, _ = _run(quiet_params, commands)
        assert np.all(np.abs(theta) <= ANGLE_LIMIT + STOP_MARGIN)

    def test_Should_keep_active_command_When_command_is_none(self, quiet_params):
        rng = np.random.default_rng(0)
        state, _ = plant_step(PlantState(), MotorCommand(0.5, 2.0), quiet_params, rng)
        state, _ = plant_step(state, None, quiet_params, rng)
        assert state.command == MotorCommand(0.5, 2.0)
        assert state.tick == 2

    def test_Should_stamp_time_of_tick_When_sampled(self, quiet_params):
        plant = FinPlant(quiet_params)
        plant.reset(0)
        times = [plant.step().t for _ in range(3)]
        assert times == [0.0, 0.01, 0.02]

    def test_Should_raise_plant_fault_with_state_When_state_becomes_non_finite(self):
        rng = np.random.default_rng(0)
        broken = PlantState(theta_f=float("nan"))
        with pytest.raises(PlantFault) as e:
            plant_step(broken, MotorCommand.hold(0.0), PlantParams(), rng)
        assert "theta_f" in e.value.state

    def test_Should_cancel_mean_lateral_force_When_sweep_is_time_symmetric(self):
        params = PlantParams(c_a=0.0, sigma=0.0)
        amplitude, speed = 0.6, 2.0
        plant = FinPlant(params)
        plant.reset(0)
        command = MotorCommand(amplitude, speed)
        switches, fy = [], []
        while len(switches) < 46:
            if plant.state.theta_m == command.target_angle:
                command = MotorCommand(-command.target_angle, speed)
                switches.append(len(fy))
            fy.append(plant.step(command).fy)
        # Skip the first cycles while the fin lag settles; then 20 full cycles.
        steady = np.array(fy[switches[4] : switches[44]])
        assert abs(steady.mean()) < 1e-3
