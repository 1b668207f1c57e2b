"""Nurse scheduling model: hard rules 1-5 as penalty terms, optional soft cost.

Nurses are split into three fixed groups: 1..m1 work graveyard shifts (U1),
m1+1..m1+m2 work night shifts (U2), and the rest work day shifts (U3).
x[i][j] = 1 means nurse i is on duty on day j; all public indices are
1-based to match shift-table conventions.

Hard penalty blocks (each zero iff its rule set is satisfied):
  T1  per-day on-duty counts per group equal n1 / n2 / n3
  T2  no isolated working day for U1 and U2 nurses (runs of 1s have length >= 2)
  T3  every (k+2)-day window has at most k working days (U1 and U2), via
      k slack bits per window
  T4  every full Saturday-anchored week has at most 5 working days (all
      nurses), via 5 slack bits per week
The soft cost counts missed two-day working blocks for graveyard nurses,
which rewards consecutive leaves; the optional workload term pins each
nurse's total shifts to a target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .poly import CompiledModel, Expr, Registry, gate_penalty, quadratize

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_SATURDAY = WEEKDAYS.index("Sat")
_WEIGHT_KEYS = ("t1", "t2", "t3", "t4", "workload", "soft")


class InstanceError(ValueError):
    """Invalid scheduling instance parameters."""


def _weekday_index(name: str) -> int:
    for i, w in enumerate(WEEKDAYS):
        if name == w or name == w[:3] or name.capitalize().startswith(w):
            return i
    raise InstanceError(f"unknown weekday {name!r}")


@dataclass(frozen=True)
class NspInstance:
    """All parameters of one scheduling problem.

    Group sizes m1/m2 may be zero (with the matching per-day count zero),
    which drops that group's constraints; this covers workload-only setups
    where every nurse is in the graveyard group.
    """

    N: int
    m1: int
    m2: int
    n1: int
    n2: int
    n3: int
    k: int
    d: int
    first_weekday: str = "Mon"
    weights: Mapping[str, float] = field(default_factory=dict)
    soft_two_day_leave: bool = False
    workload_target: int | None = None

    def __post_init__(self) -> None:
        if self.N < 1:
            raise InstanceError("N must be at least 1")
        if self.d < 1:
            raise InstanceError("d must be at least 1")
        if self.k < 2:
            raise InstanceError("k must be at least 2")
        if self.m1 < 0 or self.m2 < 0 or self.m1 + self.m2 > self.N:
            raise InstanceError("group sizes must be nonnegative with m1 + m2 <= N")
        for mi, ni, rule in ((self.m1, self.n1, 1), (self.m2, self.n2, 2)):
            if mi > 0 and not 0 <= ni < mi:
                raise InstanceError(f"rule {rule} requires 0 <= n{rule} < m{rule}")
            if mi == 0 and ni != 0:
                raise InstanceError(f"n{rule} must be 0 when m{rule} is 0")
        if not 0 <= self.n3 <= self.m3:
            raise InstanceError("n3 must satisfy 0 <= n3 <= N - m1 - m2")
        _weekday_index(self.first_weekday)
        if self.workload_target is not None and not 0 <= self.workload_target <= self.d:
            raise InstanceError("workload_target must lie in [0, d]")
        unknown = set(self.weights) - set(_WEIGHT_KEYS)
        if unknown:
            raise InstanceError(f"unknown weight key(s): {sorted(unknown)}")
        if any(v < 0 for v in self.weights.values()):
            raise InstanceError("weights must be nonnegative")
        self.resolved_weights()

    @property
    def m3(self) -> int:
        return self.N - self.m1 - self.m2

    def group(self, which: int) -> range:
        """1-based nurse indices of group 1 (U1), 2 (U2), or 3 (U3)."""
        if which == 1:
            return range(1, self.m1 + 1)
        if which == 2:
            return range(self.m1 + 1, self.m1 + self.m2 + 1)
        if which == 3:
            return range(self.m1 + self.m2 + 1, self.N + 1)
        raise ValueError("group must be 1, 2, or 3")

    def resolved_weights(self) -> dict[str, float]:
        """Fill in default weights.

        Hard weights default to 1; with the soft cost enabled they default to
        m1*(d-1) + 1, so a single hard violation always outweighs the largest
        possible soft improvement.
        """
        hard = float(self.m1 * (self.d - 1) + 1) if self.soft_two_day_leave else 1.0
        out = {"t1": hard, "t2": hard, "t3": hard, "t4": hard,
               "workload": hard, "soft": 1.0}
        out.update({k: float(v) for k, v in self.weights.items()})
        return out


def saturdays(first_weekday: str, d: int) -> list[int]:
    """1-based day indices falling on Saturday, ascending."""
    if d < 1:
        raise InstanceError("d must be at least 1")
    w0 = _weekday_index(first_weekday)
    return [j for j in range(1, d + 1) if (w0 + j - 1) % 7 == _SATURDAY]


# -- model construction ----------------------------------------------------

ScheduleVars = dict  # (nurse, day) 1-based -> Expr


def build_vars(inst: NspInstance, registry: Registry) -> ScheduleVars:
    """Register one schedule bit per (nurse, day), row-major."""
    return {
        (i, j): registry.binary(f"x[{i}][{j}]")
        for i in range(1, inst.N + 1)
        for j in range(1, inst.d + 1)
    }


def build_t1(inst: NspInstance, x: ScheduleVars) -> Expr:
    """Per-day on-duty counts: sum over days of squared count mismatches."""
    e = 0
    for which, need in ((1, inst.n1), (2, inst.n2), (3, inst.n3)):
        nurses = inst.group(which)
        if not nurses:
            continue
        for j in range(1, inst.d + 1):
            col = sum(x[(i, j)] for i in nurses)
            e = e + (col - need) ** 2
    if isinstance(e, int):  # every group empty
        e = Expr(next(iter(x.values())).registry)
    return e.label("T1")


def build_t2(inst: NspInstance, x: ScheduleVars, mode: str = "polynomial") -> Expr:
    """No isolated working day for U1/U2 nurses.

    `polynomial` emits the closed cubic forms directly; `gates` builds the
    same zero set from AND/OR/NOT gate penalties with auxiliary variables.
    """
    if inst.d < 2:
        raise InstanceError("T2 requires at least 2 days")
    reg = next(iter(x.values())).registry
    e: Expr | int = 0
    nurses = range(1, inst.m1 + inst.m2 + 1)
    if mode == "polynomial":
        for i in nurses:
            e = e + x[(i, 1)] * (1 - x[(i, 2)])
            e = e + x[(i, inst.d)] * (1 - x[(i, inst.d - 1)])
            for j in range(1, inst.d - 1):
                e = e + x[(i, j + 1)] * (1 - x[(i, j)]) * (1 - x[(i, j + 2)])
    elif mode == "gates":
        for i in nurses:
            z = reg.binary(f"t2nb[{i}][1]")
            e = e + gate_penalty("NOT", x[(i, 2)], z) + x[(i, 1)] * z
            z = reg.binary(f"t2nb[{i}][{inst.d}]")
            e = e + gate_penalty("NOT", x[(i, inst.d - 1)], z) + x[(i, inst.d)] * z
            for j in range(1, inst.d - 1):
                z_or = reg.binary(f"t2or[{i}][{j}]")
                z_not = reg.binary(f"t2not[{i}][{j}]")
                e = e + gate_penalty("OR", x[(i, j)], x[(i, j + 2)], z_or)
                e = e + gate_penalty("NOT", z_or, z_not)
                e = e + x[(i, j + 1)] * z_not
    else:
        raise ValueError(f"unknown T2 mode {mode!r}")
    if isinstance(e, int):
        e = Expr(reg)
    return e.label("T2")


def build_t3(inst: NspInstance, x: ScheduleVars, slacks: dict) -> Expr:
    """At most k working days in every (k+2)-day window, for U1/U2 nurses.

    Each window gets k fresh slack bits; `slacks` is populated with
    (nurse, window_start, slack_position) -> Expr.
    """
    reg = next(iter(x.values())).registry
    e: Expr | int = 0
    if inst.d >= inst.k + 2:
        for i in range(1, inst.m1 + inst.m2 + 1):
            for l in range(1, inst.d - inst.k):  # l = 1 .. d-(k+1)
                window = sum(x[(i, j)] for j in range(l, l + inst.k + 2))
                slack = 0
                for p in range(1, inst.k + 1):
                    s = reg.binary(f"s[{i}][{l}][{p}]")
                    slacks[(i, l, p)] = s
                    slack = slack + s
                e = e + (window - slack) ** 2
    if isinstance(e, int):
        e = Expr(reg)
    return e.label("T3")


def build_t4(inst: NspInstance, x: ScheduleVars, slacks: dict) -> Expr:
    """At most 5 working days in every full Saturday-anchored week, all nurses.

    Five fresh slack bits per (nurse, week); `slacks` is populated with
    (nurse, week_start, slack_position) -> Expr.
    """
    reg = next(iter(x.values())).registry
    weeks = [l for l in saturdays(inst.first_weekday, inst.d) if l + 6 <= inst.d]
    e: Expr | int = 0
    for i in range(1, inst.N + 1):
        for l in weeks:
            week = sum(x[(i, j)] for j in range(l, l + 7))
            slack = 0
            for p in range(1, 6):
                y = reg.binary(f"y[{i}][{l}][{p}]")
                slacks[(i, l, p)] = y
                slack = slack + y
            e = e + (week - slack) ** 2
    if isinstance(e, int):
        e = Expr(reg)
    return e.label("T4")


def build_soft_two_day(inst: NspInstance, x: ScheduleVars) -> Expr:
    """Count of adjacent day pairs where a graveyard nurse is not working both.

    Minimizing this maximizes consecutive working blocks and therefore
    consolidates the fixed number of leave days into multi-day leaves.
    """
    reg = next(iter(x.values())).registry
    e: Expr | int = 0
    for i in range(1, inst.m1 + 1):
        for j in range(1, inst.d):
            e = e + (1 - x[(i, j)] * x[(i, j + 1)])
    if isinstance(e, int):
        e = Expr(reg)
    return e.label("soft")


def build_workload_equality(
    inst: NspInstance, x: ScheduleVars, group: Iterable[int], target: int
) -> Expr:
    """Pin each group member's total shifts to `target` (squared mismatch)."""
    if target > inst.d:
        raise InstanceError("workload target exceeds the horizon")
    group = list(group)
    if not group:
        raise InstanceError("workload group must be nonempty")
    e: Expr | int = 0
    for i in group:
        row = sum(x[(i, j)] for j in range(1, inst.d + 1))
        e = e + (row - target) ** 2
    return e.label("workload")


@dataclass(frozen=True)
class BuiltModel:
    expr: Expr
    model: CompiledModel
    var_map: dict          # (nurse, day) -> variable index
    slack_t3: dict         # (nurse, window_start, p) -> variable index
    slack_t4: dict         # (nurse, week_start, p) -> variable index
    registry: Registry
    inst: NspInstance


def assemble(inst: NspInstance, t2_mode: str = "polynomial") -> BuiltModel:
    """Build the full weighted objective, quadratize, and compile.

    Blocks with zero weight are skipped entirely (no slack variables).
    Variable order: schedule bits row-major, then T3 slacks, then T4 slacks,
    then quadratization auxiliaries.
    """
    reg = Registry()
    x = build_vars(inst, reg)
    w = inst.resolved_weights()
    h: Expr = Expr(reg)
    if inst.soft_two_day_leave and w["soft"] > 0 and inst.m1 > 0 and inst.d >= 2:
        h = h + w["soft"] * build_soft_two_day(inst, x)
    if w["t1"] > 0:
        h = h + w["t1"] * build_t1(inst, x)
    if w["t2"] > 0 and inst.m1 + inst.m2 > 0 and inst.d >= 2:
        h = h + w["t2"] * build_t2(inst, x, mode=t2_mode)
    t3_slacks: dict = {}
    if w["t3"] > 0 and inst.m1 + inst.m2 > 0 and inst.d >= inst.k + 2:
        h = h + w["t3"] * build_t3(inst, x, t3_slacks)
    t4_slacks: dict = {}
    if w["t4"] > 0 and any(
        l + 6 <= inst.d for l in saturdays(inst.first_weekday, inst.d)
    ):
        h = h + w["t4"] * build_t4(inst, x, t4_slacks)
    if inst.workload_target is not None and w["workload"] > 0:
        h = h + w["workload"] * build_workload_equality(
            inst, x, range(1, inst.N + 1), inst.workload_target
        )
    model = quadratize(h).compile()

    def _index(e: Expr) -> int:
        (mono,) = e.terms
        (i,) = mono
        return i

    return BuiltModel(
        expr=h,
        model=model,
        var_map={key: _index(e) for key, e in x.items()},
        slack_t3={key: _index(e) for key, e in t3_slacks.items()},
        slack_t4={key: _index(e) for key, e in t4_slacks.items()},
        registry=reg,
        inst=inst,
    )


# -- decoding and verification --------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Decoded N x d on-duty matrix with the group split (m1, m2)."""

    bits: np.ndarray
    m1: int
    m2: int

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValueError("schedule bits must be a 2-D matrix")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("schedule entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def num_nurses(self) -> int:
        return self.bits.shape[0]

    @property
    def num_days(self) -> int:
        return self.bits.shape[1]

    def row(self, nurse: int) -> np.ndarray:
        """1-based nurse row."""
        return self.bits[nurse - 1]


def decode(s, b: BuiltModel) -> Schedule:
    """Project a sample's schedule bits into a matrix; slack/aux bits are dropped."""
    assignment = s.assignment if hasattr(s, "assignment") else s
    if len(assignment) != b.model.num_vars:
        raise ValueError(
            f"assignment length {len(assignment)} != model size {b.model.num_vars}"
        )
    bits = np.zeros((b.inst.N, b.inst.d), dtype=np.uint8)
    for (i, j), idx in b.var_map.items():
        bits[i - 1, j - 1] = assignment[idx]
    return Schedule(bits=bits, m1=b.inst.m1, m2=b.inst.m2)


def _runs(row: Sequence[int]):
    """Yield (start_day_1based, length) for each maximal run of 1s."""
    start = None
    for j, v in enumerate(row, start=1):
        if v and start is None:
            start = j
        elif not v and start is not None:
            yield start, j - start
            start = None
    if start is not None:
        yield start, len(row) - start + 1


@dataclass(frozen=True)
class RuleReport:
    """Encoding-independent verdicts for rules 1-5.

    rule1..rule3 list offending days; rule4 lists (nurse, run_start) for runs
    outside [2, k]; rule5 lists (nurse, week_start) for overfull weeks.
    """

    rule1: tuple
    rule2: tuple
    rule3: tuple
    rule4: tuple
    rule5: tuple

    @property
    def feasible(self) -> bool:
        return not (self.rule1 or self.rule2 or self.rule3 or self.rule4 or self.rule5)

    def as_dict(self) -> dict:
        return {
            "rule1": list(self.rule1),
            "rule2": list(self.rule2),
            "rule3": list(self.rule3),
            "rule4": [list(v) for v in self.rule4],
            "rule5": [list(v) for v in self.rule5],
            "feasible": self.feasible,
        }


def check_rules(sched: Schedule, inst: NspInstance) -> RuleReport:
    """Direct combinatorial check of rules 1-5 on a decoded schedule."""
    if sched.bits.shape != (inst.N, inst.d):
        raise ValueError("schedule dimensions do not match the instance")
    bits = sched.bits
    day_fail: dict[int, list[int]] = {1: [], 2: [], 3: []}
    for which, need in ((1, inst.n1), (2, inst.n2), (3, inst.n3)):
        nurses = inst.group(which)
        if not nurses:
            continue
        rows = bits[[i - 1 for i in nurses]]
        sums = rows.sum(axis=0)
        day_fail[which] = [j for j in range(1, inst.d + 1) if sums[j - 1] != need]
    rule4 = []
    for i in range(1, inst.m1 + inst.m2 + 1):
        for start, length in _runs(bits[i - 1]):
            if not 2 <= length <= inst.k:
                rule4.append((i, start))
    rule5 = []
    weeks = [l for l in saturdays(inst.first_weekday, inst.d) if l + 6 <= inst.d]
    for i in range(1, inst.N + 1):
        for l in weeks:
            if bits[i - 1, l - 1 : l + 6].sum() > 5:
                rule5.append((i, l))
    return RuleReport(
        rule1=tuple(day_fail[1]),
        rule2=tuple(day_fail[2]),
        rule3=tuple(day_fail[3]),
        rule4=tuple(rule4),
        rule5=tuple(rule5),
    )


def window_rule_feasible(sched: Schedule, inst: NspInstance) -> bool:
    """Feasibility under the window-sum form of the consecutive-days bound.

    Matches the zero set of the hard penalty encoding: rules 1-3, run length
    >= 2 for U1/U2, every (k+2)-day window sum <= k for U1/U2, and rule 5.
    This is stricter than the plain run-length <= k check for some patterns.
    """
    r = check_rules(sched, inst)
    if r.rule1 or r.rule2 or r.rule3 or r.rule5:
        return False
    for i in range(1, inst.m1 + inst.m2 + 1):
        row = sched.bits[i - 1]
        for _, length in _runs(row):
            if length < 2:
                return False
        for l in range(0, inst.d - inst.k - 1):
            if row[l : l + inst.k + 2].sum() > inst.k:
                return False
    return True


def soft_cost(sched: Schedule, inst: NspInstance) -> int:
    """Graveyard two-day-leave cost: missed adjacent working pairs."""
    total = 0
    for i in range(1, inst.m1 + 1):
        row = sched.bits[i - 1]
        total += sum(1 - int(row[j] & row[j + 1]) for j in range(inst.d - 1))
    return total


# -- config ----------------------------------------------------------------

def _require_keys(obj: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise InstanceError(f"unknown key(s) in {where}: {sorted(unknown)}")


def instance_from_config(cfg: Mapping) -> NspInstance:
    """Build an instance from the JSON config document, rejecting unknown keys."""
    _require_keys(cfg, {
        "nurses", "graveyard", "night", "day_per_day", "max_consecutive",
        "days", "first_weekday", "soft_two_day_leave", "weights",
        "workload_target",
    }, "config")
    for group_key in ("graveyard", "night"):
        grp = cfg.get(group_key, {})
        if not isinstance(grp, Mapping):
            raise InstanceError(f"{group_key} must be an object")
        _require_keys(grp, {"size", "per_day"}, group_key)
    weights = cfg.get("weights") or {}
    if not isinstance(weights, Mapping):
        raise InstanceError("weights must be an object")
    _require_keys(weights, set(_WEIGHT_KEYS), "weights")
    try:
        return NspInstance(
            N=int(cfg["nurses"]),
            m1=int(cfg.get("graveyard", {}).get("size", 0)),
            n1=int(cfg.get("graveyard", {}).get("per_day", 0)),
            m2=int(cfg.get("night", {}).get("size", 0)),
            n2=int(cfg.get("night", {}).get("per_day", 0)),
            n3=int(cfg.get("day_per_day", 0)),
            k=int(cfg.get("max_consecutive", 2)),
            d=int(cfg["days"]),
            first_weekday=str(cfg.get("first_weekday", "Mon")),
            weights={k: float(v) for k, v in weights.items()},
            soft_two_day_leave=bool(cfg.get("soft_two_day_leave", False)),
            workload_target=(
                None if cfg.get("workload_target") is None
                else int(cfg["workload_target"])
            ),
        )
    except KeyError as exc:
        raise InstanceError(f"missing required config key: {exc.args[0]}") from exc
