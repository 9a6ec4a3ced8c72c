"""Tracked-robot simulation: track-drive kinematics, ultrasonic sensing, collisions.

World frame: x along columns, y along rows, angles counterclockwise from +x,
wrapped into [-pi, pi).  A positive bearing means "to the left" of the
heading.  The robot is a point; physical extent is handled upstream by the
planning map's clearance radius.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

from . import _kernels


class Action(IntEnum):
    FORWARD = 0
    TURN_LEFT = 1
    TURN_RIGHT = 2


# (left, right) track angular speeds in rad/s, indexed by Action.
TRACK_SPEEDS = ((0.5, 0.5), (0.0, 0.5), (0.5, 0.0))


class SensingError(RuntimeError):
    """Sensing was requested from inside an obstacle."""


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float  # radians in [-pi, pi)

    def position(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class RobotParams:
    wheel_radius: float = 2.0       # cells
    track_separation: float = 1.0   # cells
    dt: float = 0.1                 # integration step, s
    act_dt: float = 0.5             # action-hold interval, s
    sensor_max: float = 5.0         # cells
    n_rays: int = 7                 # rays per 30-degree cone

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        ratio = self.act_dt / self.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("act_dt must be a positive integer multiple of dt")
        if self.sensor_max <= 0:
            raise ValueError("sensor_max must be positive")
        if self.n_rays < 1:
            raise ValueError("n_rays must be at least 1")

    @property
    def substeps(self):
        return int(round(self.act_dt / self.dt))

    @property
    def cruise_speed(self):
        """Forward speed in cells/s when both tracks run at 0.5 rad/s."""
        return self.wheel_radius * 0.5

    @property
    def turn_rate(self):
        """Peak |dtheta/dt| in rad/s over the three actions."""
        return self.wheel_radius * 0.5 / self.track_separation


def wrap_angle(a):
    """Wrap an angle into [-pi, pi)."""
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def step(state, action, params):
    """One explicit-Euler step of the track kinematics.

    v = R (wl + wr) / 2 drives the position along the heading and
    dtheta/dt = R (wr - wl) / l separates the tracks, so TURN_LEFT
    (right track only) increases theta.
    """
    wl, wr = TRACK_SPEEDS[action]
    v = params.wheel_radius * (wl + wr) / 2.0
    omega = params.wheel_radius * (wr - wl) / params.track_separation
    dt = params.dt
    return RobotState(
        state.x + v * math.cos(state.theta) * dt,
        state.y + v * math.sin(state.theta) * dt,
        wrap_angle(state.theta + omega * dt),
    )


def collides(grid, state):
    """True when the position falls inside a blocked cell or off the map."""
    x, y = state.x, state.y
    if x < 0.0 or y < 0.0 or x >= grid.width or y >= grid.height:
        return True
    return bool(grid.blocked[int(y), int(x)])


def sense(grid, state, params):
    """Six cone readings covering the front 180 degrees, leftmost first.

    Each reading is the minimum distance over evenly spaced rays to the
    first blocked cell (the map border counts), clipped to sensor_max.
    """
    if collides(grid, state):
        raise SensingError(
            f"cannot sense from blocked position ({state.x:.3f}, {state.y:.3f})")
    return _kernels.sense_kernel(grid.blocked, state.x, state.y, state.theta,
                                 params.sensor_max, params.n_rays)


def arc_endpoint(state, action, params, duration):
    """Closed-form pose after holding one action for `duration` seconds.

    Constant (v, omega) controls trace a circular arc (or a straight line
    when omega is 0); used as the integration oracle.
    """
    wl, wr = TRACK_SPEEDS[action]
    v = params.wheel_radius * (wl + wr) / 2.0
    omega = params.wheel_radius * (wr - wl) / params.track_separation
    th0 = state.theta
    if omega == 0.0:
        return RobotState(state.x + v * math.cos(th0) * duration,
                          state.y + v * math.sin(th0) * duration, th0)
    th1 = th0 + omega * duration
    return RobotState(
        state.x + v / omega * (math.sin(th1) - math.sin(th0)),
        state.y - v / omega * (math.cos(th1) - math.cos(th0)),
        wrap_angle(th1),
    )
