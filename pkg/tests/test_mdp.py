import io
import math

import numpy as np
import pytest

from sgnav.grid import GridMap, random_map
from sgnav.mdp import (COMPARATIVE, OA, SA, RewardParams, SampleSet,
                       SAState, collect_samples, oa_reward_comparative,
                       oa_reward_concise, sa_reward, sa_state,
                       state_bin_coverage, switch_penalty)
from sgnav.robot import Action, RobotParams, RobotState, collides, sense, step


# ---------------------------------------------------------------------------
# state extraction
# ---------------------------------------------------------------------------

def test_sa_state_goal_ahead():
    s = sa_state(RobotState(1.0, 1.0, 0.5), (1.0 + math.cos(0.5), 1.0 + math.sin(0.5)))
    assert s.a_g == pytest.approx(0.0, abs=1e-12)
    assert s.d_g == pytest.approx(1.0)


def test_sa_state_goal_behind_wraps_to_minus_pi():
    s = sa_state(RobotState(0.0, 0.0, 0.0), (-2.0, 0.0))
    assert s.a_g == -math.pi
    assert s.d_g == 2.0


def test_sa_state_triangle():
    s = sa_state(RobotState(0.0, 0.0, 0.0), (3.0, 4.0))
    assert s.d_g == pytest.approx(5.0)
    assert s.a_g == pytest.approx(math.atan2(4.0, 3.0))
    assert s.a_g > 0  # goal on the left


def test_sa_state_goal_right_is_negative():
    s = sa_state(RobotState(0.0, 0.0, 0.0), (3.0, -4.0))
    assert s.a_g < 0


# ---------------------------------------------------------------------------
# rewards
# ---------------------------------------------------------------------------

def test_sa_reward_goal_arrival():
    p = RewardParams(d_n=0.5)
    r, terminal = sa_reward(SAState(0.3, 1.0), p)
    assert r == 10.0 and terminal


def test_sa_reward_misaligned():
    p = RewardParams()
    r, terminal = sa_reward(SAState(5.0, math.pi / 2), p)
    assert r == pytest.approx(-0.5) and not terminal


def test_sa_reward_aligned_progress():
    p = RewardParams(d_norm=10.0)
    r, terminal = sa_reward(SAState(2.0, 0.0), p)
    assert r == pytest.approx(0.8) and not terminal


def test_sa_reward_branches_partition():
    p = RewardParams()
    rng = np.random.default_rng(0)
    for _ in range(500):
        s = SAState(rng.uniform(0, 100), rng.uniform(-math.pi, math.pi))
        fired = 0
        if s.d_g < p.d_n:
            fired += 1
        elif abs(s.a_g) / math.pi > p.eps_a:
            fired += 1
        else:
            fired += 1
        assert fired == 1
        r, terminal = sa_reward(s, p)
        assert terminal == (s.d_g < p.d_n)


def test_oa_concise():
    assert oa_reward_concise(True) == -4.0
    assert oa_reward_concise(False) == 0.0


def test_oa_comparative_rule_order():
    p = RewardParams(d_ur=1.0, d_sa=2.5, p_scale=0.9)
    # rule 1: brake distance
    assert oa_reward_comparative(np.array([0.5, 5, 5, 5, 5, 5]), p) == -4.0
    # rule 2: everything safe
    assert oa_reward_comparative(np.full(6, 5.0), p) == 0.0
    # rule 3: first order statistics differ
    readings = np.array([1.5, 3.0, 3.0, 2.0, 3.0, 3.0])
    assert oa_reward_comparative(readings, p) == pytest.approx(-0.9 * (2.5 - 1.5))
    # rule 4: first equal, second differs
    readings = np.array([2.0, 2.2, 5.0, 2.0, 2.4, 5.0])
    assert oa_reward_comparative(readings, p) == pytest.approx(-0.9 * (2.5 - 2.2))
    # rule 5: first two pairs equal
    readings = np.array([2.0, 2.2, 2.3, 2.0, 2.2, 2.4])
    assert oa_reward_comparative(readings, p) == pytest.approx(-0.9 * (2.5 - 2.3))


def test_oa_comparative_exactly_one_rule_fires():
    p = RewardParams()
    rng = np.random.default_rng(1)
    for _ in range(2000):
        readings = rng.uniform(0.05, 5.0, size=6)
        s_min = readings.min()
        left = np.sort(readings[:3])
        right = np.sort(readings[3:])
        rules = []
        if s_min < p.d_ur:
            rules.append(1)
        elif s_min > p.d_sa:
            rules.append(2)
        elif left[0] != right[0]:
            rules.append(3)
        elif left[1] != right[1]:
            rules.append(4)
        else:
            rules.append(5)
        assert len(rules) == 1
        got = oa_reward_comparative(readings, p)
        if rules[0] == 1:
            assert got == -4.0
        elif rules[0] == 2:
            assert got == 0.0
        else:
            i = rules[0] - 3
            assert got == pytest.approx(-p.p_scale * (p.d_sa - min(left[i], right[i])))


def test_switch_penalty():
    assert switch_penalty(Action.FORWARD, Action.FORWARD) == 0.0
    assert switch_penalty(Action.TURN_LEFT, Action.FORWARD) == -0.2
    assert switch_penalty(Action.FORWARD, None) == 0.0


def test_reward_params_validation():
    with pytest.raises(ValueError):
        RewardParams(d_ur=3.0, d_sa=2.5)


# ---------------------------------------------------------------------------
# sample collection
# ---------------------------------------------------------------------------

def test_collect_zero_samples():
    m = random_map(20, 20, 0.05, seed=0)
    s = collect_samples(OA, m, 0, seed=1)
    assert len(s) == 0


def test_collect_deterministic():
    m = random_map(25, 25, 0.05, seed=2)
    a = collect_samples(OA, m, 300, seed=7)
    b = collect_samples(OA, m, 300, seed=7)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.rewards, b.rewards)
    assert np.array_equal(a.poses, b.poses)


def test_collect_rejects_full_map():
    with pytest.raises(ValueError):
        collect_samples(OA, GridMap(np.ones((3, 3), dtype=bool)), 10, seed=0)


def test_sa_terminal_samples_only_goal():
    # small arena so the random walk actually reaches goals
    m = GridMap(np.zeros((12, 12), dtype=bool))
    s = collect_samples(SA, m, 3000, seed=3)
    terminal_rewards = s.rewards[s.terminals]
    assert len(terminal_rewards) > 0
    assert np.all(terminal_rewards == 10.0)


def test_oa_concise_reward_support():
    m = random_map(50, 50, 0.05, seed=4)
    s = collect_samples(OA, m, 1500, seed=5)
    assert set(np.unique(s.rewards)) <= {-4.0, 0.0}
    assert np.all((s.rewards == -4.0) == s.terminals)


def test_oa_switch_penalty_offsets():
    m = random_map(50, 50, 0.05, seed=4)
    s = collect_samples(OA, m, 800, seed=5, use_switch_penalty=True)
    assert set(np.unique(s.rewards)) <= {-4.2, -4.0, -0.2, 0.0}


def test_oa_samples_replay_exactly():
    m = random_map(40, 40, 0.06, seed=6)
    params = RobotParams()
    cfg = RewardParams()
    s = collect_samples(OA, m, 400, seed=8, reward_cfg=cfg, robot_params=params)
    n_sub = int(round(1.0 / params.dt))
    for i in range(len(s)):
        pose = RobotState(*s.poses[i])
        collided = False
        for _ in range(n_sub):
            pose = step(pose, Action(s.actions[i]), params)
            if collides(m, pose):
                collided = True
                break
        assert (pose.x, pose.y, pose.theta) == tuple(s.next_poses[i])
        assert collided == s.terminals[i]
        if collided:
            assert s.rewards[i] == cfg.collide_penalty
            assert np.array_equal(s.next_states[i], s.states[i])
        else:
            assert s.rewards[i] == 0.0
            assert np.array_equal(s.next_states[i],
                                  np.asarray(sense(m, pose, params)))


def test_sa_samples_replay_exactly():
    m = GridMap(np.zeros((50, 50), dtype=bool))
    params = RobotParams()
    cfg = RewardParams()
    s = collect_samples(SA, m, 400, seed=9, reward_cfg=cfg, robot_params=params)
    n_sub = int(round(1.0 / params.dt))
    for i in range(len(s)):
        pose = RobotState(*s.poses[i])
        for _ in range(n_sub):
            pose = step(pose, Action(s.actions[i]), params)
        assert not collides(m, pose)  # colliding transitions are dropped
        assert (pose.x, pose.y, pose.theta) == tuple(s.next_poses[i])
        nxt = sa_state(pose, tuple(s.goals[i]))
        r, terminal = sa_reward(nxt, cfg)
        assert np.array_equal(s.next_states[i], nxt.as_vector())
        assert s.rewards[i] == r and s.terminals[i] == terminal


def test_random_map_coverage_beats_office():
    from sgnav.fixtures import office_map
    office = office_map()
    rand = random_map(50, 50, 0.05, seed=12)
    s_office = collect_samples(OA, office, 4000, seed=13)
    s_rand = collect_samples(OA, rand, 4000, seed=13)
    assert state_bin_coverage(s_rand, 4) > state_bin_coverage(s_office, 4)


def test_sample_csv_round_trip():
    m = random_map(30, 30, 0.05, seed=14)
    for kind in (SA, OA):
        env = GridMap(np.zeros((30, 30), dtype=bool)) if kind == SA else m
        s = collect_samples(kind, env, 120, seed=15)
        buf = io.StringIO()
        s.save_csv(buf)
        buf.seek(0)
        s2 = SampleSet.load_csv(buf, kind)
        assert np.array_equal(s.states, s2.states)
        assert np.array_equal(s.actions, s2.actions)
        assert np.array_equal(s.rewards, s2.rewards)
        assert np.array_equal(s.next_states, s2.next_states)
        assert np.array_equal(s.terminals, s2.terminals)
        assert np.array_equal(s.poses, s2.poses)
        if kind == SA:
            assert np.array_equal(s.goals, s2.goals)


def test_comparative_samples_match_reward_function():
    m = random_map(40, 40, 0.08, seed=16)
    cfg = RewardParams()
    s = collect_samples(OA, m, 300, seed=17, reward_cfg=cfg, oa_reward=COMPARATIVE)
    for i in range(len(s)):
        if s.terminals[i]:
            assert s.rewards[i] == cfg.collide_penalty
        else:
            assert s.rewards[i] == pytest.approx(
                oa_reward_comparative(s.next_states[i], cfg))
