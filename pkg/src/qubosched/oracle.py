"""Exhaustive ground truth for desk-scale verification.

`brute_force_min` enumerates every binary assignment of a compiled model and
`enumerate_feasible` lists every schedule matrix passing the direct rule
checks.  Both are strictly bounded in size; they exist to validate encodings
and the sampler, not to solve anything at scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .nsp import NspInstance, Schedule, check_rules
from .poly import CompiledModel

ARGMIN_CAP = 1024
_CHUNK = 1 << 16


class SizeError(ValueError):
    """Input too large for exhaustive enumeration."""


@dataclass(frozen=True)
class OracleResult:
    min_energy: float
    argmins: tuple[tuple[int, ...], ...]
    truncated: bool


def _energies_chunk(m: CompiledModel, start: int, stop: int) -> np.ndarray:
    """Energies for assignment indices [start, stop); bit 0 of the vector is
    the most significant bit of the index, so index order is lexicographic."""
    n = m.num_vars
    g = np.arange(start, stop, dtype=np.int64)
    bits = np.empty((stop - start, n), dtype=np.uint8)
    for i in range(n):
        bits[:, i] = (g >> (n - 1 - i)) & 1
    e = np.full(stop - start, m.offset, dtype=np.float64)
    for i, c in m.linear.items():
        e += c * bits[:, i]
    for (i, j), c in m.quadratic.items():
        e += c * (bits[:, i] & bits[:, j])
    return e


def brute_force_min(m: CompiledModel, var_limit: int = 22) -> OracleResult:
    """Exact minimum over all 2^n assignments, with argmins in lexicographic
    order capped at ARGMIN_CAP (the `truncated` flag reports the cap)."""
    n = m.num_vars
    if n > var_limit:
        raise SizeError(f"{n} variables exceed the brute-force limit {var_limit}")
    total = 1 << n
    best = np.inf
    for start in range(0, total, _CHUNK):
        e = _energies_chunk(m, start, min(start + _CHUNK, total))
        best = min(best, float(e.min()))
    argmins: list[tuple[int, ...]] = []
    truncated = False
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        e = _energies_chunk(m, start, stop)
        for pos in np.flatnonzero(e <= best + 1e-9):
            if len(argmins) >= ARGMIN_CAP:
                truncated = True
                break
            g = start + int(pos)
            argmins.append(tuple((g >> (n - 1 - i)) & 1 for i in range(n)))
        if truncated:
            break
    return OracleResult(min_energy=best, argmins=tuple(argmins), truncated=truncated)


def _row_candidates(inst: NspInstance, nurse: int) -> list[tuple[int, ...]]:
    """All d-bit rows consistent with the per-nurse parts of rules 4 and 5."""
    from .nsp import _runs, saturdays  # row-local pieces of check_rules

    weeks = [l for l in saturdays(inst.first_weekday, inst.d) if l + 6 <= inst.d]
    constrained = nurse <= inst.m1 + inst.m2
    rows = []
    for bits in itertools.product((0, 1), repeat=inst.d):
        if constrained and any(not 2 <= ln <= inst.k for _, ln in _runs(bits)):
            continue
        if any(sum(bits[l - 1 : l + 6]) > 5 for l in weeks):
            continue
        rows.append(bits)
    return rows


def enumerate_feasible(inst: NspInstance, cell_limit: int = 20) -> list[Schedule]:
    """All schedules passing check_rules, in lexicographic bit-vector order
    (row-major, nurse 1 first)."""
    if inst.N * inst.d > cell_limit:
        raise SizeError(
            f"{inst.N * inst.d} cells exceed the enumeration limit {cell_limit}"
        )
    per_nurse = [_row_candidates(inst, i) for i in range(1, inst.N + 1)]
    out = []
    for rows in itertools.product(*per_nurse):
        sched = Schedule(bits=np.array(rows, dtype=np.uint8), m1=inst.m1, m2=inst.m2)
        if check_rules(sched, inst).feasible:
            out.append(sched)
    return out
