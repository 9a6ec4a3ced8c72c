"""State extraction, reward functions, and sample collection for the two
control tasks.

The goal-approach task works on (distance, bearing) pairs; the avoidance
task works on the raw six-sensor reading vector.  Sample collection runs a
random policy (fresh action each hold interval) from random free poses and
records (state, action, reward, next state, terminal) tuples plus the
underlying poses, so every recorded transition can be replayed exactly.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .robot import RobotParams, RobotState, collides, sense, step

SA = "sa"
OA = "oa"
CONCISE = "concise"
COMPARATIVE = "comparative"

GOAL_REWARD = 10.0
SWITCH_COST = -0.2
SAMPLE_HOLD = 1.0  # seconds an action is held while collecting samples


@dataclass(frozen=True)
class SAState:
    """Goal-relative state: range in cells and bearing in [-pi, pi)."""

    d_g: float
    a_g: float

    def as_vector(self):
        return np.array([self.d_g, self.a_g])


@dataclass(frozen=True)
class RewardParams:
    d_n: float = 0.5            # goal tolerance, cells
    d_norm: float = math.hypot(50.0, 50.0)  # range normalizer (training-map diagonal)
    eps_a: float = 0.05         # aligned-enough threshold on |bearing|/pi
    p_scale: float = 0.9        # comparative-reward scale
    d_ur: float = 1.0           # brake distance, cells
    d_sa: float = 2.5           # safe distance, cells
    collide_penalty: float = -4.0
    switch_penalty: float = SWITCH_COST

    def __post_init__(self):
        if not 0.0 < self.d_ur < self.d_sa:
            raise ValueError("need 0 < d_ur < d_sa")
        if self.p_scale <= 0:
            raise ValueError("p_scale must be positive")


def sa_state(state, goal):
    """Range and bearing from a robot state to a goal point."""
    dx = goal[0] - state.x
    dy = goal[1] - state.y
    bearing = math.atan2(dy, dx) - state.theta
    return SAState(math.hypot(dx, dy), (bearing + math.pi) % (2 * math.pi) - math.pi)


def sa_reward(s, params):
    """Goal-approach reward; returns (reward, terminal).

    Arrival inside d_n pays +10 and ends the episode.  A misaligned robot
    (normalized |bearing| above eps_a) pays the misalignment; an aligned one
    is paid for closing the remaining normalized range.
    """
    a_norm = abs(s.a_g) / math.pi
    if s.d_g < params.d_n:
        return GOAL_REWARD, True
    if a_norm > params.eps_a:
        return -a_norm, False
    d_norm = min(max(s.d_g / params.d_norm, 0.0), 1.0)
    return 1.0 - d_norm - a_norm, False


def oa_reward_concise(collided):
    """Flat avoidance reward: the collision penalty or nothing."""
    return -4.0 if collided else 0.0


def oa_reward_comparative(readings, params):
    """Avoidance reward shaped by left/right reading order statistics.

    Rules fire in order: inside the brake distance costs the full penalty;
    everything beyond the safe distance is free; otherwise the first
    left/right order-statistic pair that differs prices the intrusion.
    """
    s_min = float(np.min(readings))
    if s_min < params.d_ur:
        return -4.0
    if s_min > params.d_sa:
        return 0.0
    left = np.sort(readings[:3])
    right = np.sort(readings[3:])
    for i in range(2):
        if left[i] != right[i]:
            return -params.p_scale * (params.d_sa - min(left[i], right[i]))
    return -params.p_scale * (params.d_sa - min(left[2], right[2]))


def switch_penalty(action, prev_action, cost=SWITCH_COST):
    """Cost for changing action; free on the first action of an episode."""
    if prev_action is None or action == prev_action:
        return 0.0
    return cost


@dataclass
class SampleSet:
    """Transition batch with the poses needed to replay each sample."""

    kind: str
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray
    poses: np.ndarray
    next_poses: np.ndarray
    goals: np.ndarray | None = None

    def __len__(self):
        return len(self.actions)

    def state_dim(self):
        return self.states.shape[1] if len(self) else (2 if self.kind == SA else 6)

    def save_csv(self, stream):
        dim = self.state_dim()
        names = (["d_g", "a_g"] if self.kind == SA
                 else [f"s{i + 1}" for i in range(dim)])
        header = (names + ["action", "reward"] + [f"next_{n}" for n in names]
                  + ["terminal", "x", "y", "theta", "next_x", "next_y", "next_theta"])
        if self.goals is not None:
            header += ["goal_x", "goal_y"]
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(self)):
            row = ([repr(float(v)) for v in self.states[i]]
                   + [int(self.actions[i]), repr(float(self.rewards[i]))]
                   + [repr(float(v)) for v in self.next_states[i]]
                   + [int(self.terminals[i])]
                   + [repr(float(v)) for v in self.poses[i]]
                   + [repr(float(v)) for v in self.next_poses[i]])
            if self.goals is not None:
                row += [repr(float(v)) for v in self.goals[i]]
            writer.writerow(row)

    @classmethod
    def load_csv(cls, stream, kind):
        reader = csv.reader(stream)
        header = next(reader)
        dim = 2 if kind == SA else 6
        has_goals = header[-1] == "goal_y"
        states, actions, rewards, next_states = [], [], [], []
        terminals, poses, next_poses, goals = [], [], [], []
        for row in reader:
            states.append([float(v) for v in row[:dim]])
            actions.append(int(row[dim]))
            rewards.append(float(row[dim + 1]))
            next_states.append([float(v) for v in row[dim + 2:2 * dim + 2]])
            terminals.append(bool(int(row[2 * dim + 2])))
            poses.append([float(v) for v in row[2 * dim + 3:2 * dim + 6]])
            next_poses.append([float(v) for v in row[2 * dim + 6:2 * dim + 9]])
            if has_goals:
                goals.append([float(v) for v in row[2 * dim + 9:2 * dim + 11]])
        n = len(actions)
        return cls(
            kind=kind,
            states=np.array(states).reshape(n, dim),
            actions=np.array(actions, dtype=np.int64),
            rewards=np.array(rewards),
            next_states=np.array(next_states).reshape(n, dim),
            terminals=np.array(terminals, dtype=bool),
            poses=np.array(poses).reshape(n, 3),
            next_poses=np.array(next_poses).reshape(n, 3),
            goals=np.array(goals).reshape(n, 2) if has_goals else None,
        )


def _random_free_pose(rng, free, width_unused=None):
    i = int(rng.integers(len(free)))
    x = free[i, 0] + rng.random()
    y = free[i, 1] + rng.random()
    theta = rng.random() * 2.0 * math.pi - math.pi
    return RobotState(float(x), float(y), float(theta))


def _hold(env, pose, action, params, n_sub):
    """Integrate one held action; returns (pose, collided)."""
    for _ in range(n_sub):
        pose = step(pose, action, params)
        if collides(env, pose):
            return pose, True
    return pose, False


def collect_samples(kind, env, n, seed, reward_cfg=None, robot_params=None,
                    oa_reward=CONCISE, use_switch_penalty=False,
                    hold=SAMPLE_HOLD, max_episode_holds=500):
    """Gather n transitions under a uniform random policy.

    Episodes restart from a fresh random free pose (and, for the approach
    task, a fresh random free goal cell) whenever the robot collides with an
    obstacle or the boundary, arrives at the goal, or exceeds the episode
    cap.  Collision ends an avoidance episode with a terminal penalty
    sample; an approach episode simply ends, since its reward carries no
    collision term.  Deterministic for a given seed.
    """
    if kind not in (SA, OA):
        raise ValueError(f"unknown sample kind {kind!r}")
    cfg = reward_cfg or RewardParams()
    params = robot_params or RobotParams()
    free = env.free_cells()
    if len(free) == 0:
        raise ValueError("environment has no free cells")
    rng = np.random.default_rng(seed)
    n_sub = int(round(hold / params.dt))
    dim = 2 if kind == SA else 6

    states = np.empty((n, dim))
    actions = np.empty(n, dtype=np.int64)
    rewards = np.empty(n)
    next_states = np.empty((n, dim))
    terminals = np.zeros(n, dtype=bool)
    poses = np.empty((n, 3))
    next_poses = np.empty((n, 3))
    goals = np.empty((n, 2)) if kind == SA else None

    count = 0
    while count < n:
        pose = _random_free_pose(rng, free)
        goal = None
        if kind == SA:
            while True:
                j = int(rng.integers(len(free)))
                goal = (free[j, 0] + 0.5, free[j, 1] + 0.5)
                if math.hypot(goal[0] - pose.x, goal[1] - pose.y) >= cfg.d_n:
                    break
            cur = sa_state(pose, goal).as_vector()
        else:
            cur = np.asarray(sense(env, pose, params))
        prev_action = None
        for _ in range(max_episode_holds):
            if count >= n:
                break
            action = int(rng.integers(3))
            nxt_pose, collided = _hold(env, pose, action, params, n_sub)
            if kind == SA:
                if collided:
                    break  # no collision term in the approach reward; drop it
                nxt_state = sa_state(nxt_pose, goal)
                reward, terminal = sa_reward(nxt_state, cfg)
                nxt = nxt_state.as_vector()
            else:
                if collided:
                    reward, terminal = cfg.collide_penalty, True
                    nxt = cur.copy()
                else:
                    nxt = np.asarray(sense(env, nxt_pose, params))
                    terminal = False
                    reward = (oa_reward_comparative(nxt, cfg)
                              if oa_reward == COMPARATIVE else 0.0)
            if use_switch_penalty:
                reward += switch_penalty(action, prev_action, cfg.switch_penalty)
            states[count] = cur
            actions[count] = action
            rewards[count] = reward
            next_states[count] = nxt
            terminals[count] = terminal
            poses[count] = (pose.x, pose.y, pose.theta)
            next_poses[count] = (nxt_pose.x, nxt_pose.y, nxt_pose.theta)
            if kind == SA:
                goals[count] = goal
            count += 1
            if terminal:
                break
            pose, cur, prev_action = nxt_pose, nxt, action
    return SampleSet(kind, states, actions, rewards, next_states, terminals,
                     poses, next_poses, goals)


def state_bin_coverage(samples, bins_per_dim=4, lows=None, highs=None):
    """Number of distinct occupied state bins under a uniform grid binning."""
    states = samples.states
    if lows is None:
        lows = np.zeros(states.shape[1])
    if highs is None:
        highs = np.full(states.shape[1], 5.0)
    lows = np.asarray(lows, dtype=float)
    highs = np.asarray(highs, dtype=float)
    scaled = (states - lows) / (highs - lows)
    idx = np.clip((scaled * bins_per_dim).astype(int), 0, bins_per_dim - 1)
    return len({tuple(row) for row in idx})
