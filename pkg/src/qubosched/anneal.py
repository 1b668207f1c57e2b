"""Multi-read simulated annealing for compiled QUBO models.

Each read is an independent restart: uniform random initial state, then
`num_sweeps` sweeps of sequential single-flip Metropolis updates with a
geometric inverse-temperature schedule from beta_hot to beta_cold.  The flip
energy change is computed incrementally from the flipped variable's adjacency:

    dE_i = (1 - 2*x_i) * (linear_i + sum_j quadratic_ij * x_j)

Read r draws from a splitmix64 stream derived from (seed, r), so results are
bit-identical for equal (model, params) regardless of scheduling, and the
best energy over a prefix of reads is non-increasing for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .poly import CompiledModel

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class AnnealParams:
    num_reads: int = 10
    num_sweeps: int = 10000
    seed: int = 0
    beta_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.num_reads < 1:
            raise ValueError("num_reads must be positive")
        if self.num_sweeps < 1:
            raise ValueError("num_sweeps must be positive")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.beta_range is not None:
            hot, cold = self.beta_range
            if not (0 < hot <= cold):
                raise ValueError("beta_range requires 0 < beta_hot <= beta_cold")


@dataclass(frozen=True)
class Sample:
    assignment: np.ndarray  # uint8 bit vector
    energy: float
    read_index: int


@dataclass(frozen=True)
class SampleSet:
    samples: tuple[Sample, ...]

    def __iter__(self):
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def best(self) -> Sample:
        return best(self)


def best(s: SampleSet) -> Sample:
    """Sample with minimal energy; ties broken by lowest read_index."""
    if len(s.samples) == 0:
        raise ValueError("empty sample set")
    return min(s.samples, key=lambda smp: (smp.energy, smp.read_index))


def default_beta_range(m: CompiledModel) -> tuple[float, float]:
    """(ln2 / dE_max, ln1000 / dE_min) from the model's coefficient scales.

    dE_max is the largest |linear_i| + sum_j |quadratic_ij| over variables;
    dE_min is the smallest nonzero |coefficient| touching any variable.
    """
    reach: dict[int, float] = {}
    smallest = math.inf
    for i, c in m.linear.items():
        reach[i] = reach.get(i, 0.0) + abs(c)
        smallest = min(smallest, abs(c))
    for (i, j), c in m.quadratic.items():
        reach[i] = reach.get(i, 0.0) + abs(c)
        reach[j] = reach.get(j, 0.0) + abs(c)
        smallest = min(smallest, abs(c))
    if not reach:
        raise ValueError("degenerate model: no nonzero coefficients")
    de_max = max(reach.values())
    return math.log(2.0) / de_max, math.log(1000.0) / smallest


def _splitmix64(state: int) -> tuple[int, int]:
    """Python-side splitmix64 step, used only for per-read seed derivation."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _read_seed(seed: int, read_index: int) -> int:
    state = seed
    state, _ = _splitmix64(state)
    state = (state ^ (read_index * 0xD1B54A32D192ED03)) & _MASK64
    _, out = _splitmix64(state)
    return out


@njit(cache=True)
def _run_reads(lin, nbr_ptr, nbr_idx, nbr_val, betas, seeds, states):  # pragma: no cover
    num_reads, n = states.shape
    num_sweeps = betas.shape[0]
    for r in range(num_reads):
        s = seeds[r]
        x = states[r]
        for i in range(n):
            s = s + np.uint64(0x9E3779B97F4A7C15)
            z = s
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
            x[i] = np.uint8(z >> np.uint64(63))
        # local fields: h[i] = linear_i + sum_j quadratic_ij x_j, kept
        # incrementally so a proposal is O(1) and a flip is O(degree)
        h = lin.copy()
        for i in range(n):
            if x[i]:
                for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                    h[nbr_idx[p]] += nbr_val[p]
        for t in range(num_sweeps):
            beta = betas[t]
            for i in range(n):
                d_e = (1.0 - 2.0 * x[i]) * h[i]
                accept = d_e <= 0.0
                if not accept:
                    s = s + np.uint64(0x9E3779B97F4A7C15)
                    z = s
                    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
                    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
                    z = z ^ (z >> np.uint64(31))
                    u = (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
                    accept = u < math.exp(-beta * d_e)
                if accept:
                    if x[i]:
                        x[i] = 0
                        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                            h[nbr_idx[p]] -= nbr_val[p]
                    else:
                        x[i] = 1
                        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                            h[nbr_idx[p]] += nbr_val[p]


def _adjacency(m: CompiledModel):
    """Symmetric CSR view of the quadratic terms."""
    n = m.num_vars
    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), c in m.quadratic.items():
        neighbors[i].append((j, c))
        neighbors[j].append((i, c))
    ptr = np.zeros(n + 1, dtype=np.int64)
    idx = np.empty(sum(len(v) for v in neighbors), dtype=np.int64)
    val = np.empty(idx.shape[0], dtype=np.float64)
    pos = 0
    for i, nbrs in enumerate(neighbors):
        for j, c in sorted(nbrs):
            idx[pos] = j
            val[pos] = c
            pos += 1
        ptr[i + 1] = pos
    lin = np.zeros(n, dtype=np.float64)
    for i, c in m.linear.items():
        lin[i] = c
    return lin, ptr, idx, val


def beta_schedule(beta_hot: float, beta_cold: float, num_sweeps: int) -> np.ndarray:
    """Geometric interpolation from beta_hot to beta_cold over num_sweeps sweeps."""
    return np.geomspace(beta_hot, beta_cold, num_sweeps)


def sample(m: CompiledModel, p: AnnealParams) -> SampleSet:
    """Run `p.num_reads` independent annealing reads and report final states."""
    hot, cold = p.beta_range if p.beta_range is not None else default_beta_range(m)
    if not (0 < hot <= cold):
        raise ValueError("beta_range requires 0 < beta_hot <= beta_cold")
    lin, ptr, idx, val = _adjacency(m)
    betas = beta_schedule(hot, cold, p.num_sweeps)
    seeds = np.array(
        [_read_seed(p.seed, r) for r in range(p.num_reads)], dtype=np.uint64
    )
    states = np.zeros((p.num_reads, m.num_vars), dtype=np.uint8)
    _run_reads(lin, ptr, idx, val, betas, seeds, states)
    samples = tuple(
        Sample(assignment=states[r].copy(), energy=m.energy(states[r]), read_index=r)
        for r in range(p.num_reads)
    )
    return SampleSet(samples=samples)
