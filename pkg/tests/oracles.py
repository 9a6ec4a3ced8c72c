"""Independent brute-force reference implementations used only by tests.

Everything here is deliberately written against different machinery than the
library (plain heapq searches, numpy fixed-point sweeps, exhaustive scans)
so the two sides can check each other.
"""

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def octile_pair(a, b):
    adx = abs(b[0] - a[0])
    ady = abs(b[1] - a[1])
    return SQRT2 * min(adx, ady) + abs(adx - ady)


def dijkstra_grid(grid, start, goal):
    """Uniform-cost 8-neighbor search (no heuristic); corner cutting forbidden.

    Returns the optimal length or None.
    """
    width, height = grid.width, grid.height
    blocked = grid.blocked
    if blocked[start[1], start[0]] or blocked[goal[1], goal[0]]:
        return None
    dist = {tuple(start): 0.0}
    heap = [(0.0, tuple(start))]
    moves = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2)]
    goal = tuple(goal)
    while heap:
        d, cell = heapq.heappop(heap)
        if d > dist.get(cell, math.inf):
            continue
        if cell == goal:
            return d
        x, y = cell
        for mx, my, w in moves:
            nx, ny = x + mx, y + my
            if not (0 <= nx < width and 0 <= ny < height):
                continue
            if blocked[ny, nx]:
                continue
            if mx and my and (blocked[y, nx] or blocked[ny, x]):
                continue
            nd = d + w
            if nd < dist.get((nx, ny), math.inf):
                dist[(nx, ny)] = nd
                heapq.heappush(heap, (nd, (nx, ny)))
    return None


def corner_cells(grid):
    """Enumerate the corner-rule cells by direct definition."""
    out = set()
    for y in range(grid.height):
        for x in range(grid.width):
            if grid.is_blocked(x, y):
                continue
            for dx in (-1, 1):
                for dy in (-1, 1):
                    if (grid.is_blocked(x + dx, y + dy)
                            and grid.is_free(x + dx, y)
                            and grid.is_free(x, y + dy)):
                        out.add((x, y))
    return out


_MOVES8 = [(1, 0), (-1, 0), (0, 1), (0, -1),
           (1, 1), (1, -1), (-1, 1), (-1, -1)]


def shortest_reach_map(grid, source, avoid=None):
    """Cells reachable from `source` along some unblocked shortest octile
    path whose interior avoids the `avoid` mask.

    Walks Chebyshev rings outward (every shortest-path predecessor sits
    exactly one ring inward) and validates each candidate move by integer
    octile-pair arithmetic, so it shares nothing with the library's row scan.
    """
    width, height = grid.width, grid.height
    blocked = grid.blocked.tolist()
    avoid_l = avoid.tolist() if avoid is not None else None
    sx, sy = int(source[0]), int(source[1])
    reach = np.zeros((height, width), dtype=bool)
    if blocked[sy][sx]:
        return reach
    passable = [[True] * width for _ in range(height)]
    if avoid_l is not None:
        for y in range(height):
            row = avoid_l[y]
            prow = passable[y]
            for x in range(width):
                if row[x]:
                    prow[x] = False
    passable[sy][sx] = True  # the source never counts as interior
    reach_l = [[False] * width for _ in range(height)]
    reach_l[sy][sx] = True

    max_r = max(sx, width - 1 - sx, sy, height - 1 - sy)
    for r in range(1, max_r + 1):
        ring = []
        y0, y1 = sy - r, sy + r
        for x in range(max(0, sx - r), min(width - 1, sx + r) + 1):
            if y0 >= 0:
                ring.append((x, y0))
            if y1 < height:
                ring.append((x, y1))
        x0, x1 = sx - r, sx + r
        for y in range(max(0, sy - r + 1), min(height - 1, sy + r - 1) + 1):
            if x0 >= 0:
                ring.append((x0, y))
            if x1 < width:
                ring.append((x1, y))
        alive = False
        for x, y in ring:
            if blocked[y][x]:
                continue
            adx = x - sx if x >= sx else sx - x
            ady = y - sy if y >= sy else sy - y
            dc = adx if adx < ady else ady
            cc = adx - ady if adx > ady else ady - adx
            ok = False
            for mx, my in _MOVES8:
                px, py = x - mx, y - my
                if not (0 <= px < width and 0 <= py < height):
                    continue
                if not reach_l[py][px] or not passable[py][px]:
                    continue
                apx = px - sx if px >= sx else sx - px
                apy = py - sy if py >= sy else sy - py
                dp = apx if apx < apy else apy
                cp = apx - apy if apx > apy else apy - apx
                if mx and my:
                    if dp != dc - 1 or cp != cc:
                        continue
                    # corner cells flanking the diagonal step must be free
                    if blocked[py][x] or blocked[y][px]:
                        continue
                else:
                    if dp != dc or cp != cc - 1:
                        continue
                ok = True
                break
            if ok:
                reach_l[y][x] = True
                alive = True
        if not alive:
            break
    for y in range(height):
        row = reach_l[y]
        for x in range(width):
            if row[x]:
                reach[y, x] = True
    return reach


def h_reachable_oracle(grid, a, b):
    return bool(shortest_reach_map(grid, a)[b[1], b[0]])


def direct_reachable_oracle(grid, subgoal_set, source):
    """Subgoals joined to `source` by a shortest path with no subgoal interior."""
    mask = np.zeros((grid.height, grid.width), dtype=bool)
    for (x, y) in subgoal_set:
        mask[y, x] = True
    reach = shortest_reach_map(grid, source, avoid=mask)
    src = (int(source[0]), int(source[1]))
    return {(x, y) for (x, y) in subgoal_set
            if (x, y) != src and reach[y, x]}


def nearest_obstacle_field(grid):
    """Exhaustive min-distance to any blocked cell, border ring included."""
    coords = []
    for y in range(grid.height):
        for x in range(grid.width):
            if grid.blocked[y, x]:
                coords.append((x, y))
    for x in range(-1, grid.width + 1):
        coords.append((x, -1))
        coords.append((x, grid.height))
    for y in range(grid.height):
        coords.append((-1, y))
        coords.append((grid.width, y))
    coords = np.array(coords, dtype=float)
    xs = np.arange(grid.width, dtype=float)
    ys = np.arange(grid.height, dtype=float)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    d2 = ((pts[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1)).reshape(grid.height, grid.width)


def dense_ray_readings(grid, state, sensor_max=5.0, n_rays=70, step=0.002):
    """Fine-grained marching version of the six-cone sensor model."""
    out = np.full(6, sensor_max)
    cone = math.pi / 6.0
    for s in range(6):
        hi = math.pi / 2.0 - s * cone
        lo = hi - cone
        for r in range(n_rays):
            ang = state.theta + lo + (hi - lo) * r / (n_rays - 1)
            dx, dy = math.cos(ang), math.sin(ang)
            t = step
            while t < sensor_max:
                px, py = state.x + t * dx, state.y + t * dy
                cx, cy = math.floor(px), math.floor(py)
                if not (0 <= cx < grid.width and 0 <= cy < grid.height) \
                        or grid.blocked[int(cy), int(cx)]:
                    break
                t += step
            out[s] = min(out[s], min(t, sensor_max))
    return out


def value_iteration(n_states, n_actions, transition, reward, gamma, tol=1e-12):
    """Tabular value iteration for tiny deterministic MDPs.

    `transition[s][a]` is the next state, `reward[s][a]` the immediate reward.
    Returns (values, greedy policy).
    """
    v = np.zeros(n_states)
    while True:
        q = np.empty((n_states, n_actions))
        for s in range(n_states):
            for a in range(n_actions):
                q[s, a] = reward[s][a] + gamma * v[transition[s][a]]
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) < tol:
            return v_new, q.argmax(axis=1)
        v = v_new
