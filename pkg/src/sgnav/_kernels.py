"""Compiled kernels for grid search, reachability scans, and ray casting.

Everything here operates on raw numpy arrays so numba can compile it; the
public modules wrap these with validated, typed interfaces.  Heap ordering
is (f ascending, g descending, index ascending) to keep searches fully
deterministic for benchmarking.
"""

import math

import numpy as np
from numba import njit

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# binary heap over parallel arrays
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _heap_less(hf, hg, hi, a, b):
    if hf[a] != hf[b]:
        return hf[a] < hf[b]
    if hg[a] != hg[b]:
        return hg[a] > hg[b]  # prefer larger g on equal f
    return hi[a] < hi[b]


@njit(cache=True)
def _heap_push(hf, hg, hi, size, f, g, idx):
    hf[size] = f
    hg[size] = g
    hi[size] = idx
    child = size
    while child > 0:
        parent = (child - 1) >> 1
        if _heap_less(hf, hg, hi, child, parent):
            hf[child], hf[parent] = hf[parent], hf[child]
            hg[child], hg[parent] = hg[parent], hg[child]
            hi[child], hi[parent] = hi[parent], hi[child]
            child = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(hf, hg, hi, size):
    top_g = hg[0]
    top_i = hi[0]
    size -= 1
    hf[0] = hf[size]
    hg[0] = hg[size]
    hi[0] = hi[size]
    parent = 0
    while True:
        left = 2 * parent + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _heap_less(hf, hg, hi, right, left):
            best = right
        if _heap_less(hf, hg, hi, best, parent):
            hf[best], hf[parent] = hf[parent], hf[best]
            hg[best], hg[parent] = hg[parent], hg[best]
            hi[best], hi[parent] = hi[parent], hi[best]
            parent = best
        else:
            break
    return top_g, top_i, size


@njit(cache=True, inline="always")
def _octile(dx, dy):
    adx = abs(dx)
    ady = abs(dy)
    if adx < ady:
        adx, ady = ady, adx
    return SQRT2 * ady + (adx - ady)


# ---------------------------------------------------------------------------
# shortest-octile-path reachability (bounding parallelogram DP)
# ---------------------------------------------------------------------------

@njit(cache=True)
def h_reachable_kernel(blocked, sx, sy, gx, gy):
    """True iff an unblocked 8-neighbor path of exactly octile length exists.

    Diagonal steps are disallowed when either adjacent cardinal cell is
    blocked (no corner cutting).
    """
    if blocked[sy, sx] or blocked[gy, gx]:
        return False
    dx = gx - sx
    dy = gy - sy
    adx = abs(dx)
    ady = abs(dy)
    if adx == 0 and ady == 0:
        return True
    qx = 0 if dx == 0 else (1 if dx > 0 else -1)
    qy = 0 if dy == 0 else (1 if dy > 0 else -1)
    m = min(adx, ady)           # diagonal moves
    c = abs(adx - ady)          # cardinal moves along the long axis
    if adx >= ady:
        lx, ly = qx, 0
    else:
        lx, ly = 0, qy
    reach = np.zeros((m + 1, c + 1), dtype=np.bool_)
    for i in range(m + 1):
        for j in range(c + 1):
            x = sx + qx * i + lx * j
            y = sy + qy * i + ly * j
            if blocked[y, x]:
                continue
            if i == 0 and j == 0:
                reach[0, 0] = True
                continue
            ok = False
            if i > 0 and reach[i - 1, j]:
                # diagonal step; both cells adjacent to the corner must be free
                if not blocked[y - qy, x] and not blocked[y, x - qx]:
                    ok = True
            if not ok and j > 0 and reach[i, j - 1]:
                ok = True
            reach[i, j] = ok
    return reach[m, c]


# ---------------------------------------------------------------------------
# direct-reachable scan: marked cells joined to the source by some shortest
# octile path whose interior contains no marked cell
# ---------------------------------------------------------------------------

@njit(cache=True)
def direct_reachable_kernel(blocked, marked, extra_x, extra_y, sx, sy, out_xy):
    """Fill out_xy with marked/extra cells direct-reachable from (sx, sy).

    Processes the four diagonal quadrants with a row DP; a cell qualifies
    when some shortest octile path from the source reaches it without any
    marked cell strictly inside the path.  Rows are scanned only up to the
    live span (beyond the previous row's written extent a cell can only be
    fed by the in-row chain, so once that dies the rest is unreachable).
    Returns the result count.
    """
    height, width = blocked.shape
    n_extra = extra_x.shape[0]
    count = 0
    for qi in range(4):
        qx = 1 if qi < 2 else -1
        qy = 1 if qi % 2 == 0 else -1
        ux_max = (width - 1 - sx) if qx == 1 else sx
        uy_max = (height - 1 - sy) if qy == 1 else sy
        reach_prev = np.zeros(ux_max + 1, dtype=np.bool_)
        pass_prev = np.zeros(ux_max + 1, dtype=np.bool_)
        reach_cur = np.zeros(ux_max + 1, dtype=np.bool_)
        pass_cur = np.zeros(ux_max + 1, dtype=np.bool_)
        prev_written = -1  # last u written in the previous row
        for v in range(uy_max + 1):
            y = sy + qy * v
            any_reached = False
            written = -1
            for u in range(ux_max + 1):
                if u > prev_written + 1 and u >= 1 and not pass_cur[u - 1]:
                    break  # no predecessor can feed this cell or anything past it
                x = sx + qx * u
                written = u
                if blocked[y, x]:
                    reach_cur[u] = False
                    pass_cur[u] = False
                    continue
                if u == 0 and v == 0:
                    reach_cur[0] = True
                    pass_cur[0] = True  # the source never counts as interior
                    any_reached = True
                    continue
                ok = False
                if u >= 1 and v >= 1 and u - 1 <= prev_written and pass_prev[u - 1]:
                    # diagonal predecessor with corner-cut check
                    if not blocked[sy + qy * (v - 1), x] and not blocked[y, sx + qx * (u - 1)]:
                        ok = True
                if not ok and u >= 1 and u - 1 >= v and pass_cur[u - 1]:
                    ok = True  # cardinal step along x (only in the x-dominant wedge)
                if not ok and v >= 1 and v - 1 >= u and u <= prev_written and pass_prev[u]:
                    ok = True  # cardinal step along y
                reach_cur[u] = ok
                if not ok:
                    pass_cur[u] = False
                    continue
                any_reached = True
                is_marked = marked[y, x]
                if not is_marked:
                    for e in range(n_extra):
                        if extra_x[e] == x and extra_y[e] == y:
                            is_marked = True
                            break
                pass_cur[u] = not is_marked
                if is_marked:
                    # emit each axis cell from a single quadrant only
                    if (u > 0 or qx == 1) and (v > 0 or qy == 1):
                        out_xy[count, 0] = x
                        out_xy[count, 1] = y
                        count += 1
            if not any_reached:
                break
            prev_written = written
            reach_prev, reach_cur = reach_cur, reach_prev
            pass_prev, pass_cur = pass_cur, pass_prev
    return count


# ---------------------------------------------------------------------------
# grid A* (8-neighbor, octile costs, no corner cutting)
# ---------------------------------------------------------------------------

@njit(cache=True)
def grid_astar_kernel(blocked, sx, sy, gx, gy):
    """Optimal 8-neighbor search. Returns (found, length, path as (k, 2) xy)."""
    height, width = blocked.shape
    empty = np.empty((0, 2), dtype=np.int64)
    if blocked[sy, sx] or blocked[gy, gx]:
        return False, 0.0, empty
    n = width * height
    start = sy * width + sx
    goal = gy * width + gx
    if start == goal:
        out = np.empty((1, 2), dtype=np.int64)
        out[0, 0] = sx
        out[0, 1] = sy
        return True, 0.0, out

    g = np.full(n, np.inf)
    closed = np.zeros(n, dtype=np.bool_)
    parent = np.full(n, -1, dtype=np.int64)
    cap = 8 * n + 8
    hf = np.empty(cap)
    hg = np.empty(cap)
    hi = np.empty(cap, dtype=np.int64)
    size = 0

    g[start] = 0.0
    size = _heap_push(hf, hg, hi, size, _octile(gx - sx, gy - sy), 0.0, start)
    moves_x = (1, -1, 0, 0, 1, 1, -1, -1)
    moves_y = (0, 0, 1, -1, 1, -1, 1, -1)
    found = False
    while size > 0:
        gv, v, size = _heap_pop(hf, hg, hi, size)
        if closed[v]:
            continue
        closed[v] = True
        if v == goal:
            found = True
            break
        x = v % width
        y = v // width
        for k in range(8):
            mx = moves_x[k]
            my = moves_y[k]
            nx = x + mx
            ny = y + my
            if nx < 0 or nx >= width or ny < 0 or ny >= height:
                continue
            if blocked[ny, nx]:
                continue
            if k >= 4 and (blocked[y, nx] or blocked[ny, x]):
                continue  # no corner cutting
            w = 1.0 if k < 4 else SQRT2
            u = ny * width + nx
            ng = gv + w
            if ng < g[u]:
                g[u] = ng
                parent[u] = v
                size = _heap_push(hf, hg, hi, size,
                                  ng + _octile(gx - nx, gy - ny), ng, u)
    if not found:
        return False, 0.0, empty

    length = g[goal]
    n_cells = 1
    v = goal
    while parent[v] >= 0:
        v = parent[v]
        n_cells += 1
    path = np.empty((n_cells, 2), dtype=np.int64)
    v = goal
    for i in range(n_cells - 1, -1, -1):
        path[i, 0] = v % width
        path[i, 1] = v // width
        v = parent[v]
    return True, length, path


# ---------------------------------------------------------------------------
# A* over a vertex graph (CSR base graph + per-query augmentation)
# ---------------------------------------------------------------------------

@njit(cache=True)
def graph_astar_kernel(vx, vy, indptr, targets, weights,
                       aug_x, aug_y, aug_indptr, aug_targets, aug_weights,
                       in_src, in_dst, in_w, start, goal):
    """A* over the base graph plus query-scoped vertices.

    Vertices 0..nb-1 come from the base CSR arrays; vertices nb.. are the
    augmentation.  in_* lists extra edges whose source is any vertex and
    whose target is an augmented vertex.  Returns (found, length, id path).
    """
    nb = vx.shape[0]
    na = aug_x.shape[0]
    n = nb + na
    empty = np.empty(0, dtype=np.int64)
    gx = vx[goal] if goal < nb else aug_x[goal - nb]
    gy = vy[goal] if goal < nb else aug_y[goal - nb]
    if start == goal:
        out = np.empty(1, dtype=np.int64)
        out[0] = start
        return True, 0.0, out

    g = np.full(n, np.inf)
    closed = np.zeros(n, dtype=np.bool_)
    parent = np.full(n, -1, dtype=np.int64)
    cap = targets.shape[0] + aug_targets.shape[0] + in_src.shape[0] + 8
    hf = np.empty(cap)
    hg = np.empty(cap)
    hi = np.empty(cap, dtype=np.int64)
    size = 0

    sxc = vx[start] if start < nb else aug_x[start - nb]
    syc = vy[start] if start < nb else aug_y[start - nb]
    g[start] = 0.0
    size = _heap_push(hf, hg, hi, size, _octile(gx - sxc, gy - syc), 0.0, start)
    found = False
    while size > 0:
        gv, v, size = _heap_pop(hf, hg, hi, size)
        if closed[v]:
            continue
        closed[v] = True
        if v == goal:
            found = True
            break
        if v < nb:
            lo = indptr[v]
            hi_edge = indptr[v + 1]
        else:
            lo = aug_indptr[v - nb]
            hi_edge = aug_indptr[v - nb + 1]
        for e in range(lo, hi_edge):
            if v < nb:
                u = targets[e]
                w = weights[e]
            else:
                u = aug_targets[e]
                w = aug_weights[e]
            if closed[u]:
                continue
            ng = gv + w
            if ng < g[u]:
                g[u] = ng
                parent[u] = v
                ux = vx[u] if u < nb else aug_x[u - nb]
                uy = vy[u] if u < nb else aug_y[u - nb]
                size = _heap_push(hf, hg, hi, size,
                                  ng + _octile(gx - ux, gy - uy), ng, u)
        for e in range(in_src.shape[0]):
            if in_src[e] != v:
                continue
            u = in_dst[e]
            if closed[u]:
                continue
            ng = gv + in_w[e]
            if ng < g[u]:
                g[u] = ng
                parent[u] = v
                ux = vx[u] if u < nb else aug_x[u - nb]
                uy = vy[u] if u < nb else aug_y[u - nb]
                size = _heap_push(hf, hg, hi, size,
                                  ng + _octile(gx - ux, gy - uy), ng, u)
    if not found:
        return False, 0.0, empty

    n_vertices = 1
    v = goal
    while parent[v] >= 0:
        v = parent[v]
        n_vertices += 1
    path = np.empty(n_vertices, dtype=np.int64)
    v = goal
    for i in range(n_vertices - 1, -1, -1):
        path[i] = v
        v = parent[v]
    return True, g[goal], path


# ---------------------------------------------------------------------------
# ultrasonic ray casting (exact grid traversal)
# ---------------------------------------------------------------------------

@njit(cache=True)
def ray_distance_kernel(blocked, ox, oy, angle, max_d):
    """Distance along the ray to the first blocked (or out-of-map) cell."""
    height, width = blocked.shape
    dx = math.cos(angle)
    dy = math.sin(angle)
    cx = int(math.floor(ox))
    cy = int(math.floor(oy))
    if dx > 0.0:
        step_x = 1
        t_max_x = (cx + 1 - ox) / dx
        t_dx = 1.0 / dx
    elif dx < 0.0:
        step_x = -1
        t_max_x = (cx - ox) / dx
        t_dx = -1.0 / dx
    else:
        step_x = 0
        t_max_x = np.inf
        t_dx = np.inf
    if dy > 0.0:
        step_y = 1
        t_max_y = (cy + 1 - oy) / dy
        t_dy = 1.0 / dy
    elif dy < 0.0:
        step_y = -1
        t_max_y = (cy - oy) / dy
        t_dy = -1.0 / dy
    else:
        step_y = 0
        t_max_y = np.inf
        t_dy = np.inf
    while True:
        if t_max_x <= t_max_y:
            t = t_max_x
            cx += step_x
            t_max_x += t_dx
        else:
            t = t_max_y
            cy += step_y
            t_max_y += t_dy
        if t >= max_d:
            return max_d
        if cx < 0 or cx >= width or cy < 0 or cy >= height:
            return t
        if blocked[cy, cx]:
            return t


@njit(cache=True)
def sense_kernel(blocked, x, y, theta, sensor_max, n_rays):
    """Six 30-degree cone readings spanning the front half plane.

    Sensor 0 is leftmost ([+60, +90] degrees off heading), sensor 5 rightmost.
    Each reading is the minimum ray distance over n_rays rays in the cone.
    """
    out = np.full(6, sensor_max)
    cone = math.pi / 6.0
    for s in range(6):
        hi = math.pi / 2.0 - s * cone
        lo = hi - cone
        for r in range(n_rays):
            if n_rays > 1:
                rel = lo + (hi - lo) * r / (n_rays - 1)
            else:
                rel = 0.5 * (lo + hi)
            d = ray_distance_kernel(blocked, x, y, theta + rel, sensor_max)
            if d < out[s]:
                out[s] = d
    return out
