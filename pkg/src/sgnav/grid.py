"""Occupancy grid maps: MovingAI text I/O, down-sampling, random generation.

A ``GridMap`` stores one boolean per cell (True = blocked).  Every query
treats cells outside the map as blocked, so callers never need their own
bounds checks.
"""

import numpy as np

FREE_CHARS = frozenset(".G")
BLOCKED_CHARS = frozenset("@OTW")


class MapFormatError(ValueError):
    """Map text does not follow the MovingAI layout."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridMap:
    """Immutable 2D occupancy grid indexed by (x, y) = (column, row)."""

    __slots__ = ("blocked", "width", "height")

    def __init__(self, blocked):
        arr = np.array(blocked, dtype=bool)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("blocked must be a non-empty 2D array")
        arr.setflags(write=False)
        self.blocked = arr
        self.height, self.width = arr.shape

    def in_bounds(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height

    def is_blocked(self, x, y):
        """Blocked flag for cell (x, y); out-of-bounds cells are blocked."""
        if not self.in_bounds(x, y):
            return True
        return bool(self.blocked[y, x])

    def is_free(self, x, y):
        return not self.is_blocked(x, y)

    def free_cells(self):
        """All free cells as an (n, 2) array of (x, y) pairs, row-major order."""
        ys, xs = np.nonzero(~self.blocked)
        return np.column_stack([xs, ys]).astype(np.int64)

    @property
    def n_blocked(self):
        return int(self.blocked.sum())

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and bool(np.array_equal(self.blocked, other.blocked)))

    __hash__ = None

    def __repr__(self):
        return f"GridMap({self.width}x{self.height}, {self.n_blocked} blocked)"


def load_map(text):
    """Parse MovingAI .map text (string or file-like) into a GridMap.

    Header: ``type <t>``, ``height H``, ``width W``, ``map``, then H rows of
    W terrain characters.  '.' and 'G' are free; '@', 'O', 'T', 'W' blocked.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = text.split("\n")

    def header(idx, key):
        if idx >= len(lines):
            raise MapFormatError(f"missing '{key}' header line", line=idx + 1)
        parts = lines[idx].split()
        if not parts or parts[0] != key:
            raise MapFormatError(f"expected '{key}' header, got {lines[idx]!r}",
                                 line=idx + 1)
        return parts[1:]

    header(0, "type")
    try:
        height = int(header(1, "height")[0])
        width = int(header(2, "width")[0])
    except (IndexError, ValueError):
        raise MapFormatError("height/width headers must carry one integer", line=2)
    if header(3, "map"):
        raise MapFormatError("'map' header takes no arguments", line=4)
    if height <= 0 or width <= 0:
        raise MapFormatError(f"dimensions must be positive, got {width}x{height}", line=2)

    blocked = np.zeros((height, width), dtype=bool)
    for row in range(height):
        lineno = 5 + row
        if 4 + row >= len(lines):
            raise MapFormatError(f"expected {height} map rows, got {row}", line=lineno)
        raw = lines[4 + row].rstrip("\r")
        if len(raw) != width:
            raise MapFormatError(
                f"row has {len(raw)} characters, expected {width}", line=lineno)
        for col, ch in enumerate(raw):
            if ch in BLOCKED_CHARS:
                blocked[row, col] = True
            elif ch not in FREE_CHARS:
                raise MapFormatError(
                    f"unknown terrain character {ch!r} at column {col + 1}",
                    line=lineno)
    return GridMap(blocked)


def save_map(grid):
    """Serialize a GridMap to MovingAI .map text using '.' and '@'."""
    rows = ["".join("@" if b else "." for b in grid.blocked[y])
            for y in range(grid.height)]
    return "\n".join(
        ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
        + rows) + "\n"


def downsample(grid, k):
    """Shrink by factor k; an output cell is blocked iff any covered cell is.

    The conservative rule never frees a blocked region, so plans made on the
    coarse map stay collision-free on the fine one.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"downsample factor must be a positive integer, got {k!r}")
    if k == 1:
        return GridMap(grid.blocked)
    out_h = -(-grid.height // k)
    out_w = -(-grid.width // k)
    padded = np.zeros((out_h * k, out_w * k), dtype=bool)
    padded[:grid.height, :grid.width] = grid.blocked
    return GridMap(padded.reshape(out_h, k, out_w, k).any(axis=(1, 3)))


def random_map(width, height, obstacle_ratio, seed):
    """Map with exactly round(ratio * cells) blocked cells, placed uniformly.

    Deterministic for a given seed; the blocked count is exact, not an
    expected value.
    """
    if not 0.0 <= obstacle_ratio <= 1.0:
        raise ValueError(f"obstacle_ratio must lie in [0, 1], got {obstacle_ratio}")
    n_cells = width * height
    count = int(round(obstacle_ratio * n_cells))
    rng = np.random.default_rng(seed)
    blocked = np.zeros(n_cells, dtype=bool)
    if count:
        blocked[rng.choice(n_cells, size=count, replace=False)] = True
    return GridMap(blocked.reshape(height, width))
