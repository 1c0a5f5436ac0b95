"""First-passage random walk on a lattice discretization of the probability simplex.

A walk state is an integer occupation vector ``counts`` with ``sum(counts) == M``.
Each step picks an unordered pair of active coordinates uniformly and moves
one quantum between them, in either direction with probability 1/2.  A
coordinate that reaches zero leaves the active set for good, so the walk
descends face by face until a single vertex remains.  Every coordinate is a
martingale, hence vertex ``k`` is reached with probability ``counts[k] / M``.

Each step consumes exactly one ``rng.random()`` draw ``u``; the move index is
``floor(u * 2 * n_pairs)``, with pairs in lexicographic order of the active
indices and even/odd moves sending the quantum from the first/second member
of the pair to the other.  :func:`step` and the vectorized kernel behind
:func:`run_collapse` follow this law draw for draw.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._validation import check_int
from .exceptions import (
    CapacityError,
    ConsistencyError,
    ContractViolation,
    RunawayWalkError,
    ShapeError,
    ValidationError,
)

ORACLE_MAX_STATES = 2_000_000
_MAX_BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise ShapeError(f"a simplex point needs d >= 2 coordinates, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < -1e-12):
            raise ValidationError("simplex coordinates must be finite and non-negative")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise ValidationError(f"simplex coordinates sum to {arr.sum():.12g}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr = arr / arr.sum()
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def d(self) -> int:
        return self.coords.size

    def __eq__(self, other):
        return isinstance(other, SimplexPoint) and np.array_equal(self.coords, other.coords)

    def __repr__(self) -> str:
        return f"SimplexPoint({self.coords.tolist()})"


@dataclass(frozen=True)
class LatticeWalkState:
    counts: tuple[int, ...]
    M: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) < 2:
            raise ShapeError("a lattice state needs at least 2 coordinates")
        if any(c < 0 for c in counts):
            raise ValidationError(f"counts must be non-negative, got {counts}")
        if sum(counts) != self.M:
            raise ValidationError(f"counts {counts} do not sum to M={self.M}")
        if self.M < 1:
            raise ValidationError("M must be positive")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts) -> "LatticeWalkState":
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts))

    @property
    def d(self) -> int:
        return len(self.counts)

    @property
    def active(self) -> frozenset[int]:
        return frozenset(k for k, c in enumerate(self.counts) if c > 0)

    @property
    def absorbed(self) -> bool:
        return len(self.active) == 1


class Rounding(str, enum.Enum):
    LARGEST_REMAINDER = "largest_remainder"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class WalkConfig:
    M: int = 100
    max_steps: int | None = None
    rounding: Rounding = Rounding.LARGEST_REMAINDER

    def __post_init__(self):
        check_int(self.M, "M", minimum=2)
        object.__setattr__(self, "rounding", Rounding(self.rounding))
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", 100 * self.M * self.M)
        check_int(self.max_steps, "max_steps", minimum=1)


@dataclass(frozen=True)
class CollapseOutcome:
    vertex: int
    steps: int
    reductions: tuple[tuple[int, int], ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "steps": self.steps,
            "reductions": [[s, k] for s, k in self.reductions],
        }


def discretize(p: SimplexPoint, config: WalkConfig, rng: np.random.Generator | None = None):
    """Map a simplex point to a lattice state with ``M`` quanta.

    Largest-remainder mode floors ``p * M`` and hands the leftover quanta to
    the largest fractional parts (ties to the lowest index).  Stochastic mode
    rounds each coordinate up with probability equal to its fractional part,
    using systematic sampling so that exactly ``M`` quanta are placed and
    ``E[counts] = p * M``.
    """
    if not isinstance(p, SimplexPoint):
        p = SimplexPoint(p)
    M = config.M
    scaled = p.coords * M
    base = np.floor(scaled + 1e-9).astype(np.int64)
    frac = np.clip(scaled - base, 0.0, None)
    leftover = M - int(base.sum())
    if config.rounding is Rounding.LARGEST_REMAINDER:
        order = sorted(range(p.d), key=lambda k: (-round(frac[k], 9), k))
        for k in order[:leftover]:
            base[k] += 1
    else:
        if rng is None:
            raise ValidationError("stochastic rounding needs a random generator")
        if leftover > 0:
            # Inclusion probabilities frac_k sum to the integer `leftover`;
            # systematic sampling hits each index with exactly that probability.
            frac = frac * (leftover / frac.sum())
            edges = np.concatenate([[0.0], np.cumsum(frac)])
            edges[-1] = float(leftover)
            u = rng.random()
            hits = np.searchsorted(edges, u + np.arange(leftover), side="right") - 1
            base[hits] += 1
    return LatticeWalkState(tuple(int(c) for c in base), M)


@lru_cache(maxsize=256)
def _pairs(active: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.combinations(active, 2))


@lru_cache(maxsize=256)
def _move_table(active: tuple[int, ...], d: int) -> np.ndarray:
    pairs = _pairs(active)
    table = np.zeros((2 * len(pairs), d), dtype=np.int64)
    for k, (a, b) in enumerate(pairs):
        table[2 * k, a], table[2 * k, b] = -1, 1
        table[2 * k + 1, a], table[2 * k + 1, b] = 1, -1
    table.setflags(write=False)
    return table


def _move(u: float, active: tuple[int, ...]) -> tuple[int, int]:
    """(source, destination) of the quantum moved by uniform draw ``u``."""
    pairs = _pairs(active)
    v = min(int(u * 2 * len(pairs)), 2 * len(pairs) - 1)
    a, b = pairs[v >> 1]
    return (a, b) if v & 1 == 0 else (b, a)


def step(state: LatticeWalkState, rng: np.random.Generator) -> LatticeWalkState:
    """One symmetric single-quantum transfer between a uniformly chosen active pair."""
    active = tuple(sorted(state.active))
    if len(active) < 2:
        raise ContractViolation("step called on an absorbed state")
    src, dst = _move(rng.random(), active)
    counts = list(state.counts)
    counts[src] -= 1
    counts[dst] += 1
    return LatticeWalkState(tuple(counts), state.M)


def one_step_distribution(state: LatticeWalkState) -> list[tuple[float, LatticeWalkState]]:
    """Every successor of ``state`` with its probability (enumerated, not sampled)."""
    active = tuple(sorted(state.active))
    if len(active) < 2:
        raise ContractViolation("an absorbed state has no successors")
    pairs = _pairs(active)
    prob = 1.0 / (2 * len(pairs))
    out = []
    for a, b in pairs:
        for src, dst in ((a, b), (b, a)):
            counts = list(state.counts)
            counts[src] -= 1
            counts[dst] += 1
            out.append((prob, LatticeWalkState(tuple(counts), state.M)))
    return out


def _advance(counts: np.ndarray, active: tuple[int, ...], u: np.ndarray):
    """Apply the moves encoded by draws ``u`` until the first face hit.

    Returns ``(new_counts, steps_used, hit)``.
    """
    if len(active) == 2:
        # single pair: draw < 1/2 moves a quantum from the first coordinate
        a, b = active
        total = counts[a] + counts[b]
        path = counts[a] + np.cumsum(np.where(u < 0.5, -1, 1))
        hits = np.flatnonzero((path == 0) | (path == total))
        t = int(hits[0]) if hits.size else u.size - 1
        out = counts.copy()
        out[a] = path[t]
        out[b] = total - path[t]
        return out, t + 1, bool(hits.size)
    table = _move_table(active, counts.size)
    idx = list(active)
    v = np.minimum((u * len(table)).astype(np.int64), len(table) - 1)
    path = counts[idx] + np.cumsum(table[:, idx][v], axis=0)
    hits = np.flatnonzero((path == 0).any(axis=1))
    t = int(hits[0]) if hits.size else u.size - 1
    out = counts.copy()
    out[idx] = path[t]
    return out, t + 1, bool(hits.size)


def walk(state: LatticeWalkState, rng: np.random.Generator, max_steps: int) -> CollapseOutcome:
    """Run the walk from ``state`` to absorption.

    Draws are taken in blocks and the path inside a block is a cumulative sum
    of move vectors.  Draws left over after a face hit carry into the next
    phase, so the trajectory is identical to iterating :func:`step`.  The
    generator ends up past the absorbing step by an unspecified amount.
    """
    counts = np.array(state.counts, dtype=np.int64)
    reductions = [(0, int(k)) for k in np.flatnonzero(counts == 0)]
    steps = 0
    block = 1024
    buf = np.empty(0)
    while True:
        active = tuple(int(k) for k in np.flatnonzero(counts))
        if len(active) == 1:
            return CollapseOutcome(active[0], steps, tuple(reductions))
        while True:
            if buf.size == 0:
                budget = max_steps - steps
                if budget <= 0:
                    raise RunawayWalkError(
                        f"walk from {state.counts} not absorbed after {max_steps} steps"
                    )
                buf = rng.random(min(block, budget))
                block = min(block * 2, _MAX_BLOCK)
            counts, used, hit = _advance(counts, active, buf)
            buf = buf[used:]
            steps += used
            if hit:
                (gone,) = [k for k in active if counts[k] == 0]
                reductions.append((steps, gone))
                break


def run_collapse(p, config: WalkConfig, rng: np.random.Generator) -> CollapseOutcome:
    """Discretize ``p`` and walk to a vertex.

    An eigenstate input is already a vertex and returns after zero steps.
    """
    state = discretize(p if isinstance(p, SimplexPoint) else SimplexPoint(p), config, rng)
    return walk(state, rng, config.max_steps)


def _compositions(M: int, d: int):
    """All non-negative integer vectors of length d summing to M (stars and bars)."""
    for bars in itertools.combinations(range(M + d - 1), d - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(M + d - 2 - prev)
        yield tuple(out)


@dataclass(frozen=True)
class _Chain:
    index: dict
    transient: list
    lu: object
    Q: sp.csr_matrix
    R: np.ndarray


@lru_cache(maxsize=8)
def _absorbing_chain(M: int, d: int) -> _Chain:
    size = math.comb(M + d - 1, d - 1)
    if size > ORACLE_MAX_STATES:
        raise CapacityError(
            f"lattice with M={M}, d={d} has {size} states (limit {ORACLE_MAX_STATES})"
        )
    transient = [c for c in _compositions(M, d) if sum(1 for x in c if x > 0) >= 2]
    index = {c: k for k, c in enumerate(transient)}
    rows, cols, vals = [], [], []
    R = np.zeros((len(transient), d))
    for k, c in enumerate(transient):
        for prob, nxt in one_step_distribution(LatticeWalkState(c, M)):
            j = index.get(nxt.counts)
            if j is None:
                R[k, nxt.counts.index(M)] += prob
            else:
                rows.append(k)
                cols.append(j)
                vals.append(prob)
    n = len(transient)
    Q = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    lu = spla.splu((sp.identity(n, format="csc") - Q).tocsc()) if n else None
    return _Chain(index, transient, lu, Q, R)


def _solve(chain: _Chain, rhs: np.ndarray) -> np.ndarray:
    x = chain.lu.solve(rhs)
    resid = np.max(np.abs(x - chain.Q @ x - rhs)) if x.size else 0.0
    if resid >= 1e-10:
        raise ConsistencyError(f"absorbing-chain solve residual {resid:.3g} >= 1e-10")
    return x


def absorption_oracle(state: LatticeWalkState) -> np.ndarray:
    """Exact vertex-absorption probabilities from ``state``.

    Solves ``(I - Q) X = R`` over every transient lattice state, where ``Q``
    is the transient-to-transient and ``R`` the transient-to-vertex block of
    the one-step transition matrix.
    """
    if state.absorbed:
        out = np.zeros(state.d)
        out[next(iter(state.active))] = 1.0
        return out
    chain = _absorbing_chain(state.M, state.d)
    X = _solve(chain, chain.R)
    return X[chain.index[state.counts]].copy()


def expected_duration_oracle(state: LatticeWalkState) -> float:
    """Exact expected number of steps to absorption, from ``(I - Q) t = 1``."""
    if state.absorbed:
        return 0.0
    chain = _absorbing_chain(state.M, state.d)
    t = _solve(chain, np.ones(len(chain.transient)))
    return float(t[chain.index[state.counts]])
