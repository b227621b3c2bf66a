"""
Synthetic ground truth for the water-tank rig: a rate-limited servo that
tracks (target angle, target angular velocity) commands, a soft fin that
follows the motor through a first-order deformation lag, and a quasi-steady
hydrodynamic force with added mass, sampled at 100 Hz.

Force law, with fin normal n = (-sin theta_f, cos theta_f):

    F = -(c_n * omega_f * |omega_f| + c_a * alpha_f) * n + noise

Example Usage:

```python
plant = FinPlant(PlantParams())
plant.reset(seed=0)
sample = plant.step(MotorCommand(0.5, 2.0))
```
"""

import hashlib
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Tuple

import numpy as np

from softfin.errors import ConfigurationError, PlantFault

SAMPLE_PERIOD = 0.01
ANGLE_LIMIT = math.pi / 2
OMEGA_MIN = 1.0
OMEGA_MAX = math.pi
# Mechanical stop, slightly past the commandable range.
STOP_MARGIN = 0.05


@dataclass(frozen=True)
class MotorCommand:
    """
    Target angle (rad) and target angular velocity (rad/s); the only
    actuation interface of plant, surrogate and policies.

    Bounds are checked as closed intervals so the hold command (angle, 1 rad/s)
    is valid.
    """

    target_angle: float
    target_angular_velocity: float

    def __post_init__(self):
        if not -ANGLE_LIMIT <= self.target_angle <= ANGLE_LIMIT:
            raise ConfigurationError(
                f"target_angle {self.target_angle} outside [-pi/2, pi/2]"
            )
        if not OMEGA_MIN <= self.target_angular_velocity <= OMEGA_MAX:
            raise ConfigurationError(
                f"target_angular_velocity {self.target_angular_velocity} "
                "outside [1, pi]"
            )

    @classmethod
    def hold(cls, angle: float = 0.0) -> "MotorCommand":
        """
        Stay at ``angle`` at the slowest allowed speed.
        """
        return cls(angle, OMEGA_MIN)

    def as_tuple(self) -> Tuple[float, float]:
        """
        (target_angle, target_angular_velocity).
        """
        return self.target_angle, self.target_angular_velocity


@dataclass(frozen=True)
class PlantParams:
    """
    Free parameters of the synthetic rig.

    c_n: normal drag coefficient (N s^2/rad^2)
    c_a: added-mass coefficient (N s^2/rad)
    tau: fin deformation lag (s)
    a_max: motor angular acceleration limit (rad/s^2)
    sigma: force noise standard deviation (N)
    dt: sample period, fixed at 0.01 s
    """

    c_n: float = 0.8
    c_a: float = 0.05
    tau: float = 0.12
    a_max: float = 40.0
    sigma: float = 0.05
    dt: float = SAMPLE_PERIOD

    def __post_init__(self):
        for name in ("c_n", "tau", "a_max"):
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(f"PlantParams.{name} must be > 0")
        for name in ("c_a", "sigma"):
            if not getattr(self, name) >= 0.0:
                raise ConfigurationError(f"PlantParams.{name} must be >= 0")
        if self.dt != SAMPLE_PERIOD:
            raise ConfigurationError(f"PlantParams.dt must be {SAMPLE_PERIOD}")

    def fingerprint(self) -> str:
        """
        Stable hash of the parameter values, recorded in dataset manifests.
        """
        text = ";".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class PlantState:
    """
    Motor and lagged fin kinematics plus the active command.
    """

    theta_m: float = 0.0
    omega_m: float = 0.0
    theta_f: float = 0.0
    omega_f: float = 0.0
    command: MotorCommand = MotorCommand.hold(0.0)
    tick: int = 0


@dataclass(frozen=True)
class ForceSample:
    """
    Force on the fin mount at time t.
    """

    fx: float
    fy: float
    t: float


def plant_reset(params: PlantParams, seed: int) -> PlantState:
    """
    Rest state at zero angle, holding zero. ``seed`` is accepted for symmetry
    with the RNG the caller builds from it; the state itself is deterministic.
    """
    del params, seed
    return PlantState()


def _motor_step(
    theta: float, omega: float, command: MotorCommand, a_max: float, dt: float
) -> Tuple[float, float]:
    target = command.target_angle
    error = target - theta
    if error == 0.0 and omega == 0.0:
        return theta, 0.0
    # Trapezoidal profile: cruise speed capped by the stopping distance.
    cruise = min(command.target_angular_velocity, math.sqrt(2.0 * a_max * abs(error)))
    desired = math.copysign(cruise, error) if error != 0.0 else 0.0
    dv = min(max(desired - omega, -a_max * dt), a_max * dt)
    omega_next = omega + dv
    theta_next = theta + omega_next * dt
    if error != 0.0 and (target - theta_next) * error <= 0.0:
        return target, 0.0
    stop = ANGLE_LIMIT + STOP_MARGIN
    if abs(theta_next) > stop:
        return math.copysign(stop, theta_next), 0.0
    return theta_next, omega_next


def fin_force(
    theta_f: float, omega_f: float, alpha_f: float, params: PlantParams
) -> Tuple[float, float]:
    """
    Noise-free force for the given fin kinematics.
    """
    magnitude = params.c_n * omega_f * abs(omega_f) + params.c_a * alpha_f
    return magnitude * math.sin(theta_f), -magnitude * math.cos(theta_f)


def plant_step(
    state: PlantState,
    command: Optional[MotorCommand],
    params: PlantParams,
    rng: np.random.Generator,
) -> Tuple[PlantState, ForceSample]:
    """
    Advance the plant one 10 ms tick.

    :param command: New command, preempting the active one; None keeps it.
    :raises PlantFault: If the resulting state is not finite.
    """
    command = command or state.command
    dt = params.dt
    theta_m, omega_m = _motor_step(
        state.theta_m, state.omega_m, command, params.a_max, dt
    )
    theta_f = state.theta_f + (dt / params.tau) * (theta_m - state.theta_f)
    omega_f = (theta_f - state.theta_f) / dt
    alpha_f = (omega_f - state.omega_f) / dt
    fx, fy = fin_force(theta_f, omega_f, alpha_f, params)
    noise = rng.normal(0.0, 1.0, 2) * params.sigma
    fx += float(noise[0])
    fy += float(noise[1])

    next_state = replace(
        state,
        theta_m=theta_m,
        omega_m=omega_m,
        theta_f=theta_f,
        omega_f=omega_f,
        command=command,
        tick=state.tick + 1,
    )
    values = (theta_m, omega_m, theta_f, omega_f, fx, fy)
    if not all(math.isfinite(v) for v in values):
        dump = asdict(next_state)
        dump.update(fx=fx, fy=fy)
        raise PlantFault("plant state became non-finite", dump)
    return next_state, ForceSample(fx, fy, state.tick * dt)


class FinPlant:
    """
    Stateful wrapper: one plant, one RNG stream.

    :param params: Rig parameters.
    """

    def __init__(self, params: Optional[PlantParams] = None):
        self.params = params or PlantParams()
        self.state = PlantState()
        self._rng = np.random.default_rng(0)

    def reset(self, seed: int) -> PlantState:
        """
        Return to rest and restart the noise stream from ``seed``.
        """
        self.state = plant_reset(self.params, seed)
        self._rng = np.random.default_rng(seed)
        return self.state

    def step(self, command: Optional[MotorCommand] = None) -> ForceSample:
        """
        Advance one tick under ``command`` (or the active one).
        """
        self.state, sample = plant_step(self.state, command, self.params, self._rng)
        return sample
