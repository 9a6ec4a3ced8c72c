"""Subgoal graphs over occupancy grids, plus a grid A* baseline.

Vertices sit at convex obstacle corners.  Two cells are h-reachable when
some unblocked 8-neighbor path between them has exactly their octile
distance; an edge joins two vertices when additionally no shortest path
between them passes through a third vertex.  Queries attach the two
endpoints to the graph with temporary vertices and run A* over the result,
which returns grid-optimal lengths while expanding only corner vertices.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels

SQRT2 = math.sqrt(2.0)

_EMPTY_XY = np.empty(0, dtype=np.int64)
_EMPTY_W = np.empty(0, dtype=np.float64)


def octile(a, b):
    """Octile distance: sqrt(2) per diagonal step plus the cardinal remainder."""
    adx = abs(b[0] - a[0])
    ady = abs(b[1] - a[1])
    if adx < ady:
        adx, ady = ady, adx
    return SQRT2 * ady + (adx - ady)


def _require_free(grid, cell, name):
    x, y = cell
    if not grid.is_free(x, y):
        raise ValueError(f"{name} cell {cell} is blocked or out of bounds")


def subgoal_mask(grid):
    """Boolean mask of corner cells: free, with some diagonal neighbor blocked
    while both cardinal cells flanking that diagonal are free."""
    blocked = grid.blocked
    free = ~blocked
    mask = np.zeros_like(blocked)

    def shifted(arr, dx, dy, fill):
        out = np.full_like(arr, fill)
        h, w = arr.shape
        xs0, xs1 = max(dx, 0), min(w + dx, w)
        ys0, ys1 = max(dy, 0), min(h + dy, h)
        out[ys0 - dy:ys1 - dy, xs0 - dx:xs1 - dx] = arr[ys0:ys1, xs0:xs1]
        return out

    for dx in (-1, 1):
        for dy in (-1, 1):
            diag_blocked = shifted(blocked, dx, dy, True)
            c1_free = shifted(free, dx, 0, False)
            c2_free = shifted(free, 0, dy, False)
            mask |= free & diag_blocked & c1_free & c2_free
    return mask


def identify_subgoals(grid):
    """Corner cells of the map as a set of (x, y) tuples."""
    ys, xs = np.nonzero(subgoal_mask(grid))
    return {(int(x), int(y)) for x, y in zip(xs, ys)}


def h_reachable(grid, a, b):
    """True iff some unblocked 8-neighbor path of exactly octile length joins a, b."""
    _require_free(grid, a, "start")
    _require_free(grid, b, "goal")
    return bool(_kernels.h_reachable_kernel(grid.blocked, a[0], a[1], b[0], b[1]))


def _direct_scan(grid, mask, extra_cells, cell, cap=None):
    if cap is None:
        cap = int(mask.sum()) + len(extra_cells) + 1
    out = np.empty((cap, 2), dtype=np.int64)
    if extra_cells:
        ex = np.array(extra_cells, dtype=np.int64)
        ex_x, ex_y = np.ascontiguousarray(ex[:, 0]), np.ascontiguousarray(ex[:, 1])
    else:
        ex_x = ex_y = _EMPTY_XY
    n = _kernels.direct_reachable_kernel(grid.blocked, mask, ex_x, ex_y,
                                         cell[0], cell[1], out)
    return [(int(out[i, 0]), int(out[i, 1])) for i in range(n)]


def get_direct_h_reachable(grid, subgoals, cell):
    """Subgoals h-reachable from cell via some shortest path free of other subgoals.

    `subgoals` may be the set from identify_subgoals or a boolean mask.
    """
    _require_free(grid, cell, "source")
    if isinstance(subgoals, np.ndarray):
        mask = subgoals
    else:
        mask = np.zeros((grid.height, grid.width), dtype=bool)
        for (x, y) in subgoals:
            mask[y, x] = True
    found = _direct_scan(grid, mask, [], cell)
    return {c for c in found if c != tuple(cell)}


@dataclass(frozen=True)
class AbstractPath:
    """Waypoint cell sequence from start to goal with its total octile length."""

    cells: tuple
    length: float

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class FindPathResult:
    path: AbstractPath | None
    h_time: float  # seconds spent on connect + search for this query


class SubgoalGraph:
    """Preprocessed vertex/edge structure for one planning map.

    Immutable after construction; queries augment it through a separate
    handle and never touch these arrays.
    """

    def __init__(self, width, height, cells, adjacency):
        self.width = width
        self.height = height
        n = len(cells)
        self.cells = np.array(cells, dtype=np.int64).reshape(n, 2)
        self.index = {(int(x), int(y)): i for i, (x, y) in enumerate(cells)}
        self.mask = np.zeros((height, width), dtype=bool)
        for (x, y) in cells:
            self.mask[y, x] = True
        indptr = np.zeros(n + 1, dtype=np.int64)
        targets = []
        weights = []
        for i in range(n):
            nbrs = sorted(adjacency[i])
            indptr[i + 1] = indptr[i] + len(nbrs)
            for j in nbrs:
                targets.append(j)
                weights.append(octile(cells[i], cells[j]))
        self.indptr = indptr
        self.targets = np.array(targets, dtype=np.int64)
        self.weights = np.array(weights, dtype=np.float64)
        if n:
            self.vx = np.ascontiguousarray(self.cells[:, 0])
            self.vy = np.ascontiguousarray(self.cells[:, 1])
        else:
            self.vx = self.vy = _EMPTY_XY
        self.mask.setflags(write=False)
        for arr in (self.cells, self.indptr, self.targets, self.weights,
                    self.vx, self.vy):
            arr.setflags(write=False)

    @property
    def n_vertices(self):
        return len(self.index)

    @property
    def n_edges(self):
        return len(self.targets) // 2

    def neighbors(self, vid):
        lo, hi = self.indptr[vid], self.indptr[vid + 1]
        return [(int(t), float(w)) for t, w in
                zip(self.targets[lo:hi], self.weights[lo:hi])]

    def edges(self):
        """Undirected edge list as ((x1, y1), (x2, y2), length), each pair once."""
        out = []
        for u in range(self.n_vertices):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            for t, w in zip(self.targets[lo:hi], self.weights[lo:hi]):
                if u < t:
                    out.append((tuple(map(int, self.cells[u])),
                                tuple(map(int, self.cells[t])), float(w)))
        return out


def build_subgoal_graph(grid):
    """Identify corner vertices and link every direct-reachable vertex pair."""
    mask = subgoal_mask(grid)
    ys, xs = np.nonzero(mask)
    cells = [(int(x), int(y)) for x, y in zip(xs, ys)]  # row-major vertex ids
    index = {c: i for i, c in enumerate(cells)}
    adjacency = []
    for cell in cells:
        found = _direct_scan(grid, mask, [], cell, cap=len(cells) + 1)
        adjacency.append([index[c] for c in found if c != cell])
    return SubgoalGraph(grid.width, grid.height, cells, adjacency)


class AugmentedGraph:
    """Query-scoped view adding temporary vertices to a base graph.

    Dropping the handle releases the augmentation; the base graph is never
    written to.
    """

    def __init__(self, base):
        self.base = base
        self.extra_cells = []
        self.extra_adj = []   # per temp vertex: [(vertex id, weight)]
        self.in_edges = []    # (source id, temp id, weight) for reverse direction

    def vertex_id(self, cell):
        cell = (int(cell[0]), int(cell[1]))
        vid = self.base.index.get(cell)
        if vid is not None:
            return vid
        nb = self.base.n_vertices
        for i, c in enumerate(self.extra_cells):
            if c == cell:
                return nb + i
        return None

    def connect(self, grid, cell):
        """Attach cell with edges to its direct-reachable vertices (idempotent)."""
        _require_free(grid, cell, "query")
        cell = (int(cell[0]), int(cell[1]))
        if self.vertex_id(cell) is not None:
            return self
        found = _direct_scan(grid, self.base.mask, self.extra_cells, cell,
                             cap=self.base.n_vertices + len(self.extra_cells) + 1)
        temp_id = self.base.n_vertices + len(self.extra_cells)
        out = []
        for c in found:
            if c == cell:
                continue
            vid = self.vertex_id(c)
            w = octile(cell, c)
            out.append((vid, w))
            self.in_edges.append((vid, temp_id, w))
        self.extra_cells.append(cell)
        self.extra_adj.append(sorted(out))
        return self

    def _arrays(self):
        n_extra = len(self.extra_cells)
        if n_extra == 0:
            return (_EMPTY_XY, _EMPTY_XY, np.zeros(1, dtype=np.int64),
                    _EMPTY_XY, _EMPTY_W, _EMPTY_XY, _EMPTY_XY, _EMPTY_W)
        ex = np.array(self.extra_cells, dtype=np.int64)
        aug_indptr = np.zeros(n_extra + 1, dtype=np.int64)
        t, w = [], []
        for i, adj in enumerate(self.extra_adj):
            aug_indptr[i + 1] = aug_indptr[i] + len(adj)
            for vid, wt in adj:
                t.append(vid)
                w.append(wt)
        if self.in_edges:
            src = np.array([e[0] for e in self.in_edges], dtype=np.int64)
            dst = np.array([e[1] for e in self.in_edges], dtype=np.int64)
            ws = np.array([e[2] for e in self.in_edges], dtype=np.float64)
        else:
            src, dst, ws = _EMPTY_XY, _EMPTY_XY, _EMPTY_W
        return (np.ascontiguousarray(ex[:, 0]), np.ascontiguousarray(ex[:, 1]),
                aug_indptr, np.array(t, dtype=np.int64),
                np.array(w, dtype=np.float64), src, dst, ws)

    def astar(self, start_cell, goal_cell):
        start = self.vertex_id(start_cell)
        goal = self.vertex_id(goal_cell)
        if start is None or goal is None:
            raise ValueError("endpoints must be connected before searching")
        aug_x, aug_y, aug_indptr, aug_t, aug_w, in_src, in_dst, in_w = self._arrays()
        base = self.base
        found, length, ids = _kernels.graph_astar_kernel(
            base.vx, base.vy, base.indptr, base.targets, base.weights,
            aug_x, aug_y, aug_indptr, aug_t, aug_w,
            in_src, in_dst, in_w, start, goal)
        if not found:
            return None
        nb = base.n_vertices
        cells = []
        for vid in ids:
            if vid < nb:
                cells.append((int(base.cells[vid, 0]), int(base.cells[vid, 1])))
            else:
                cells.append(self.extra_cells[vid - nb])
        return AbstractPath(tuple(cells), float(length))


def connect_to_graph(graph, grid, cell):
    """Wrap/extend a query augmentation with one more endpoint vertex."""
    aug = graph if isinstance(graph, AugmentedGraph) else AugmentedGraph(graph)
    return aug.connect(grid, cell)


def try_direct_path(grid, start, goal):
    """Two-cell optimal path when the endpoints are h-reachable, else None."""
    _require_free(grid, start, "start")
    _require_free(grid, goal, "goal")
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    if start == goal:
        return AbstractPath((start,), 0.0)
    if _kernels.h_reachable_kernel(grid.blocked, start[0], start[1],
                                   goal[0], goal[1]):
        return AbstractPath((start, goal), octile(start, goal))
    return None


def find_abstract_path(graph, grid, start, goal):
    """Connect both endpoints, then A* over the augmented graph."""
    aug = connect_to_graph(graph, grid, start)
    aug = connect_to_graph(aug, grid, goal)
    return aug.astar(start, goal)


def find_path(graph, grid, start, goal):
    """Full query: direct segment if possible, otherwise graph search.

    The returned h_time covers the whole connect + search for this query
    (preprocessing excluded).
    """
    t0 = time.perf_counter()
    path = try_direct_path(grid, start, goal)
    if path is None:
        path = find_abstract_path(graph, grid, start, goal)
    return FindPathResult(path, time.perf_counter() - t0)


def grid_astar(grid, start, goal):
    """Baseline optimal grid search; returns (length, cell array) or None."""
    _require_free(grid, start, "start")
    _require_free(grid, goal, "goal")
    found, length, path = _kernels.grid_astar_kernel(
        grid.blocked, int(start[0]), int(start[1]), int(goal[0]), int(goal[1]))
    if not found:
        return None
    return float(length), path


def save_graph(graph, stream):
    """Text dump: one `v x y` line per vertex, one `e x1 y1 x2 y2 length` per edge."""
    for x, y in graph.cells:
        stream.write(f"v {x} {y}\n")
    for (x1, y1), (x2, y2), w in graph.edges():
        stream.write(f"e {x1} {y1} {x2} {y2} {w!r}\n")


def load_graph(stream, grid):
    """Rebuild a graph from its text dump, validating cells and edge lengths."""
    cells = []
    edges = []
    for lineno, raw in enumerate(stream, start=1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v" and len(parts) == 3:
            x, y = int(parts[1]), int(parts[2])
            if not grid.is_free(x, y):
                raise ValueError(f"line {lineno}: vertex ({x}, {y}) is blocked")
            cells.append((x, y))
        elif parts[0] == "e" and len(parts) == 6:
            a = (int(parts[1]), int(parts[2]))
            b = (int(parts[3]), int(parts[4]))
            w = float(parts[5])
            if abs(w - octile(a, b)) > 1e-9:
                raise ValueError(f"line {lineno}: edge length {w} is not octile")
            edges.append((a, b))
        else:
            raise ValueError(f"line {lineno}: unrecognized graph record {raw!r}")
    index = {c: i for i, c in enumerate(cells)}
    adjacency = [[] for _ in cells]
    for a, b in edges:
        if a not in index or b not in index:
            raise ValueError(f"edge {a}-{b} references unknown vertex")
        adjacency[index[a]].append(index[b])
        adjacency[index[b]].append(index[a])
    return SubgoalGraph(grid.width, grid.height, cells, adjacency)
