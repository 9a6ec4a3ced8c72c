"""Least-squares policy iteration over block-structured polynomial features.

Each action owns one feature block of [1, x1, x1^2, ..., x1^p, x2, ...] over
the state components normalized into [0, 1]; the other blocks stay zero.
Policy evaluation solves the least-squares fixed point of the state-action
value function from a fixed sample batch; the outer loop alternates that
solve with greedy improvement until the weight vector stabilizes.
"""

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """The fixed-point linear system stayed unsolvable after ridge escalation."""


class PolicyError(RuntimeError):
    """A policy produced a non-finite action value."""


@dataclass(frozen=True)
class BasisSpec:
    """Feature layout: state dimension, polynomial order, normalization bounds."""

    dim: int
    order: int
    lows: tuple
    highs: tuple
    n_actions: int = 3

    def __post_init__(self):
        if len(self.lows) != self.dim or len(self.highs) != self.dim:
            raise ValueError("bounds must match the state dimension")
        if self.order < 0 or self.n_actions < 1:
            raise ValueError("order must be >= 0 and n_actions positive")

    @property
    def block_len(self):
        return 1 + self.dim * self.order

    @property
    def feature_len(self):
        return self.n_actions * self.block_len

    def monomials(self, states):
        """Per-state block [1, x1..x1^p, x2..] for an (n, dim) batch."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if states.shape[1] != self.dim:
            raise ValueError(
                f"state dimension {states.shape[1]} does not match spec {self.dim}")
        lows = np.asarray(self.lows, dtype=float)
        highs = np.asarray(self.highs, dtype=float)
        x = np.clip((states - lows) / (highs - lows), 0.0, 1.0)
        n = states.shape[0]
        out = np.empty((n, self.block_len))
        out[:, 0] = 1.0
        col = 1
        for d in range(self.dim):
            p = x[:, d].copy()
            for _ in range(self.order):
                out[:, col] = p
                p = p * x[:, d]
                col += 1
        return out


def features(state, action, spec):
    """Feature vector for one (state, action): the action's block, zeros elsewhere."""
    action = int(action)
    if not 0 <= action < spec.n_actions:
        raise ValueError(f"action {action} outside 0..{spec.n_actions - 1}")
    phi = np.zeros(spec.feature_len)
    block = spec.monomials(np.asarray(state, dtype=float).reshape(1, -1))[0]
    start = action * spec.block_len
    phi[start:start + spec.block_len] = block
    return phi


@dataclass
class Policy:
    """Linear action-value weights plus the basis they index."""

    spec: BasisSpec
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.spec.feature_len,):
            raise ValueError("weight length does not match the basis")

    def q_values(self, state):
        m = self.spec.monomials(np.asarray(state, dtype=float).reshape(1, -1))[0]
        w = self.weights.reshape(self.spec.n_actions, self.spec.block_len)
        return w @ m

    def action(self, state):
        q = self.q_values(state)
        if not np.all(np.isfinite(q)):
            raise PolicyError(f"non-finite action values {q}")
        return int(np.argmax(q))

    def actions_batch(self, states):
        m = self.spec.monomials(states)
        w = self.weights.reshape(self.spec.n_actions, self.spec.block_len)
        return np.argmax(m @ w.T, axis=1)

    def save(self, stream):
        s = self.spec
        stream.write(f"dim {s.dim}\n")
        stream.write(f"order {s.order}\n")
        stream.write(f"n_actions {s.n_actions}\n")
        stream.write("lows " + " ".join(repr(float(v)) for v in s.lows) + "\n")
        stream.write("highs " + " ".join(repr(float(v)) for v in s.highs) + "\n")
        stream.write(f"weights {len(self.weights)}\n")
        for w in self.weights:
            stream.write(repr(float(w)) + "\n")

    @classmethod
    def load(cls, stream):
        def fields(key):
            parts = stream.readline().split()
            if not parts or parts[0] != key:
                raise ValueError(f"expected '{key}' record in policy file")
            return parts[1:]

        dim = int(fields("dim")[0])
        order = int(fields("order")[0])
        n_actions = int(fields("n_actions")[0])
        lows = tuple(float(v) for v in fields("lows"))
        highs = tuple(float(v) for v in fields("highs"))
        k = int(fields("weights")[0])
        weights = np.array([float(stream.readline()) for _ in range(k)])
        spec = BasisSpec(dim, order, lows, highs, n_actions)
        return cls(spec, weights)


def greedy_action(policy, state):
    """Highest-value action; ties resolve to the lowest action index."""
    return policy.action(state)


@dataclass(frozen=True)
class LspiConfig:
    gamma: float = 0.9
    epsilon: float = 1e-3     # convergence threshold on ||w - w'||
    max_iters: int = 20
    ridge: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def _phi_matrix(spec, monos, actions):
    n = monos.shape[0]
    phi = np.zeros((n, spec.feature_len))
    bl = spec.block_len
    for a in range(spec.n_actions):
        rows = actions == a
        start = a * bl
        phi[rows, start:start + bl] = monos[rows]
    return phi


def lstdq(samples, spec, gamma, policy, ridge=1e-6):
    """Solve the least-squares fixed point for the given policy's values.

    Accumulates A = sum phi (phi - gamma phi')^T and b = sum phi r over the
    batch, zeroing the next-state term on terminal samples, and returns the
    weight solution.  A starts at ridge * I; on solver failure the ridge
    escalates tenfold up to 1e-2 before giving up.
    """
    if len(samples) == 0:
        raise ValueError("sample set is empty")
    monos = spec.monomials(samples.states)
    phi = _phi_matrix(spec, monos, samples.actions)
    next_actions = policy.actions_batch(samples.next_states)
    phi_next = _phi_matrix(spec, spec.monomials(samples.next_states), next_actions)
    phi_next[samples.terminals] = 0.0
    a_mat = phi.T @ (phi - gamma * phi_next)
    b = phi.T @ samples.rewards
    current = ridge
    while True:
        try:
            w = np.linalg.solve(a_mat + current * np.eye(spec.feature_len), b)
            if np.all(np.isfinite(w)):
                return w
        except np.linalg.LinAlgError:
            pass
        if current >= 1e-2:
            cond = float(np.linalg.cond(a_mat + current * np.eye(spec.feature_len)))
            raise SolverError(
                f"fixed-point system unsolvable (ridge {current:g}, cond {cond:.3e})")
        current *= 10.0


def lspi_train(samples, spec, cfg=None, w0=None):
    """Policy iteration on one fixed sample batch.

    Repeats evaluate-then-improve until the weight change drops below
    epsilon or max_iters solves have run; returns (policy, iteration count).
    Reruns with identical inputs produce identical weights.
    """
    cfg = cfg or LspiConfig()
    w = np.zeros(spec.feature_len) if w0 is None else np.asarray(w0, dtype=float)
    iters = 0
    while iters < cfg.max_iters:
        w_next = lstdq(samples, spec, cfg.gamma, Policy(spec, w), cfg.ridge)
        iters += 1
        delta = float(np.linalg.norm(w_next - w))
        w = w_next
        if delta < cfg.epsilon:
            break
    return Policy(spec, w), iters


def sa_basis(d_max, order=4):
    """Basis for the goal-approach state (range in [0, d_max], bearing in [-pi, pi])."""
    return BasisSpec(dim=2, order=order, lows=(0.0, -np.pi), highs=(d_max, np.pi))


def oa_basis(sensor_max=5.0, order=3):
    """Basis for the avoidance state (six readings in (0, sensor_max])."""
    return BasisSpec(dim=6, order=order, lows=(0.0,) * 6, highs=(sensor_max,) * 6)
