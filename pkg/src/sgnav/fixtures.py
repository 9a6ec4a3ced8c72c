"""Bundled deterministic environments used by the CLI, tests, and experiments.

The room maps stand in for large indoor benchmark maps: a jittered grid of
rooms separated by walls, each shared wall segment carved with a door.  The
office map is a small hand-laid training floor; the gauntlet map is the
fixed random-obstacle field used to score avoidance policies.
"""

import numpy as np

from .grid import GridMap, random_map
from .mdp import SampleSet

GAUNTLET_MAP_SEED = 20240801
GAUNTLET_RATIO = 0.13  # dense enough that weak avoidance policies actually fail


def office_map():
    """50x50 simplified office: outer walls plus two doored inner walls."""
    arr = np.zeros((50, 50), dtype=bool)
    arr[0, :] = arr[-1, :] = True
    arr[:, 0] = arr[:, -1] = True

    arr[:, 24] = True   # vertical wall with two doors
    arr[9:14, 24] = False
    arr[35:40, 24] = False
    arr[24, :] = True   # horizontal wall with two doors
    arr[24, 11:16] = False
    arr[24, 33:38] = False
    return GridMap(arr)


def rooms_map(width, height, seed, room=34, jitter=6, door=5):
    """Indoor-style benchmark map: jittered room grid, doored shared walls."""
    rng = np.random.default_rng(seed)
    arr = np.zeros((height, width), dtype=bool)

    def wall_positions(extent):
        pos = []
        p = room + int(rng.integers(-jitter, jitter + 1))
        while p < extent - room // 2:
            pos.append(p)
            p += room + int(rng.integers(-jitter, jitter + 1))
        return pos

    xs = wall_positions(width)
    ys = wall_positions(height)
    for x in xs:
        arr[:, x] = True
    for y in ys:
        arr[y, :] = True

    # carve one door per wall segment between consecutive crossings
    def carve(fixed, lo, hi, vertical):
        span = hi - lo
        if span <= door + 1:
            start = lo + max(0, (span - door) // 2)
        else:
            start = lo + 1 + int(rng.integers(span - door - 1))
        if vertical:
            arr[start:start + door, fixed] = False
        else:
            arr[fixed, start:start + door] = False

    y_bounds = [0] + ys + [height]
    x_bounds = [0] + xs + [width]
    for x in xs:
        for lo, hi in zip(y_bounds[:-1], y_bounds[1:]):
            seg_lo = lo + 1 if lo in ys else lo
            if hi - seg_lo > 1:
                carve(x, seg_lo, hi, vertical=True)
    for y in ys:
        for lo, hi in zip(x_bounds[:-1], x_bounds[1:]):
            seg_lo = lo + 1 if lo in xs else lo
            if hi - seg_lo > 1:
                carve(y, seg_lo, hi, vertical=False)
    return GridMap(arr)


def gauntlet_map(seed=GAUNTLET_MAP_SEED):
    """Fixed 50x50 random-obstacle field for avoidance-policy scoring."""
    return random_map(50, 50, GAUNTLET_RATIO, seed=seed)


def maze_map(width, height, seed, corridor=8):
    """Recursive-division maze with wide corridors, benchmark style.

    Tree-like connectivity forces long detours, which is what makes grid
    search expensive and preprocessing worthwhile.
    """
    rng = np.random.default_rng(seed)
    arr = np.zeros((height, width), dtype=bool)

    def split(x0, y0, x1, y1):
        w, h = x1 - x0, y1 - y0
        if w < 2 * corridor + 1 and h < 2 * corridor + 1:
            return
        vertical = w > h or (w == h and rng.random() < 0.5)
        if vertical and w >= 2 * corridor + 1:
            wx = x0 + corridor + int(rng.integers(w - 2 * corridor))
            door = y0 + int(rng.integers(h - corridor + 1))
            arr[y0:y1, wx] = True
            arr[door:door + corridor, wx] = False
            split(x0, y0, wx, y1)
            split(wx + 1, y0, x1, y1)
        elif h >= 2 * corridor + 1:
            wy = y0 + corridor + int(rng.integers(h - 2 * corridor))
            door = x0 + int(rng.integers(w - corridor + 1))
            arr[wy, x0:x1] = True
            arr[wy, door:door + corridor] = False
            split(x0, y0, x1, wy)
            split(x0, wy + 1, x1, y1)

    split(0, 0, width, height)
    return GridMap(arr)


def bench_map_512(seed=7, corridor=10):
    """Large maze-style map for query-time benchmarking."""
    return maze_map(512, 512, seed=seed, corridor=corridor)


# ---------------------------------------------------------------------------
# two-state chain decision process (training correctness fixture)
# ---------------------------------------------------------------------------

CHAIN_N_STATES = 2
CHAIN_N_ACTIONS = 2
CHAIN_GAMMA = 0.9
# action 0 moves toward state 0, action 1 toward state 1
CHAIN_TRANSITION = ((0, 1), (0, 1))
# landing on state 1 pays 1
CHAIN_REWARD = ((0.0, 1.0), (0.0, 1.0))


def chain_samples(repeats=25):
    """Every (state, action) transition of the chain, repeated `repeats` times."""
    states, actions, rewards, next_states = [], [], [], []
    for _ in range(repeats):
        for s in range(CHAIN_N_STATES):
            for a in range(CHAIN_N_ACTIONS):
                states.append([float(s)])
                actions.append(a)
                rewards.append(CHAIN_REWARD[s][a])
                next_states.append([float(CHAIN_TRANSITION[s][a])])
    n = len(actions)
    zeros = np.zeros((n, 3))
    return SampleSet(
        kind="chain",
        states=np.array(states),
        actions=np.array(actions, dtype=np.int64),
        rewards=np.array(rewards),
        next_states=np.array(next_states),
        terminals=np.zeros(n, dtype=bool),
        poses=zeros,
        next_poses=zeros,
    )
