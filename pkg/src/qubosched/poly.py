"""Multilinear binary polynomials, penalty labels, and QUBO/Ising compilation.

An expression is a dictionary mapping monomials (frozensets of variable
indices; the empty set is the constant term) to float coefficients.
Multilinearity (x**2 == x for binary x) is enforced on construction, so a
monomial never repeats an index and evaluation at any {0,1} assignment is the
plain sum of coefficient * product.

  Expr.terms  =  dict[frozenset[int], float]     (no zero coefficients stored)

Variables live in a Registry that assigns dense indices 0..n-1 in
registration order; names and indices are a bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

Monomial = frozenset


class DegreeError(ValueError):
    """A monomial of degree >= 3 was found where degree <= 2 is required."""


class Registry:
    """Bijective name <-> index store for binary variables."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._index: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._names)

    def binary(self, name: str) -> "Expr":
        """Return the degree-1 expression for `name`, registering it if new."""
        if not name:
            raise ValueError("variable name must be nonempty")
        idx = self._index.get(name)
        if idx is None:
            idx = len(self._names)
            self._index[name] = idx
            self._names.append(name)
        return Expr(self, {Monomial((idx,)): 1.0})

    def index(self, name: str) -> int:
        return self._index[name]

    def name(self, index: int) -> str:
        return self._names[index]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)


def binary(name: str, registry: Registry) -> "Expr":
    """Module-level alias for Registry.binary."""
    return registry.binary(name)


class Expr:
    """Multilinear polynomial over one registry, with labeled sub-expressions."""

    __slots__ = ("registry", "terms", "labels")

    def __init__(
        self,
        registry: Registry,
        terms: dict[Monomial, float] | None = None,
        labels: dict[str, "Expr"] | None = None,
    ) -> None:
        self.registry = registry
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0.0}
        self.labels = dict(labels or {})

    # -- algebra -----------------------------------------------------------

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.registry is not self.registry:
                raise ValueError("operands belong to different registries")
            return other
        if isinstance(other, (int, float)):
            return Expr(self.registry, {Monomial(): float(other)})
        return NotImplemented

    @staticmethod
    def _merge_labels(a: dict, b: dict) -> dict:
        dup = a.keys() & b.keys()
        if dup:
            raise ValueError(f"duplicate label(s): {sorted(dup)}")
        return {**a, **b}

    def __add__(self, other) -> "Expr":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in o.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Expr(self.registry, terms, self._merge_labels(self.labels, o.labels))

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(self.registry, {m: -c for m, c in self.terms.items()}, self.labels)

    def __sub__(self, other) -> "Expr":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "Expr":
        return (-self) + other

    def __mul__(self, other) -> "Expr":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        terms: dict[Monomial, float] = {}
        for ma, ca in self.terms.items():
            for mb, cb in o.terms.items():
                m = ma | mb  # multilinear: repeated indices collapse
                terms[m] = terms.get(m, 0.0) + ca * cb
        return Expr(self.registry, terms, self._merge_labels(self.labels, o.labels))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Expr":
        if not isinstance(exponent, int) or exponent < 1:
            raise ValueError("only positive integer powers are supported")
        out = self
        for _ in range(exponent - 1):
            out = out * self
        return out

    # -- queries -----------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def value(self, assignment) -> float:
        """Evaluate at a {0,1} assignment.

        `assignment` is either a sequence indexed by variable index or a
        mapping from variable name (or index) to bit.
        """
        if isinstance(assignment, Mapping):
            bits = {
                (self.registry.index(k) if isinstance(k, str) else k): v
                for k, v in assignment.items()
            }
            get = bits.__getitem__
        else:
            get = assignment.__getitem__
        total = 0.0
        for m, c in self.terms.items():
            for i in m:
                if not get(i):
                    break
            else:
                total += c
        return total

    def label(self, name: str) -> "Expr":
        """Record this expression's current terms under `name` for residual reporting."""
        if not name:
            raise ValueError("label name must be nonempty")
        if name in self.labels:
            raise ValueError(f"duplicate label(s): ['{name}']")
        labels = dict(self.labels)
        labels[name] = Expr(self.registry, dict(self.terms))
        return Expr(self.registry, dict(self.terms), labels)

    # -- compilation -------------------------------------------------------

    def compile(self) -> "CompiledModel":
        """Index the expression into a QUBO model; requires degree <= 2."""
        linear: dict[int, float] = {}
        quadratic: dict[tuple[int, int], float] = {}
        offset = 0.0
        for m, c in self.terms.items():
            if len(m) == 0:
                offset += c
            elif len(m) == 1:
                (i,) = m
                linear[i] = linear.get(i, 0.0) + c
            elif len(m) == 2:
                i, j = sorted(m)
                quadratic[(i, j)] = quadratic.get((i, j), 0.0) + c
            else:
                names = [self.registry.name(i) for i in sorted(m)]
                raise DegreeError(f"monomial {'*'.join(names)} has degree {len(m)} > 2")
        return CompiledModel(
            num_vars=len(self.registry),
            linear={i: c for i, c in linear.items() if c != 0.0},
            quadratic={k: c for k, c in quadratic.items() if c != 0.0},
            offset=offset,
            labels=dict(self.labels),
            registry=self.registry,
        )

    def __repr__(self) -> str:
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), sorted(m))):
            names = "*".join(self.registry.name(i) for i in sorted(m)) or "1"
            parts.append(f"{self.terms[m]:+g}*{names}")
        return f"Expr({' '.join(parts) or '0'})"


def label(e: Expr, name: str) -> Expr:
    return e.label(name)


# -- logic gates -----------------------------------------------------------

def logic_expr(kind: str, a: Expr, b: Expr | None = None) -> Expr:
    """Analytic gate value: AND -> ab, OR -> a+b-ab, NOT -> 1-a."""
    if kind == "NOT":
        if b is not None:
            raise ValueError("NOT takes a single operand")
        return 1 - a
    if b is None:
        raise ValueError(f"{kind} requires two operands")
    if kind == "AND":
        return a * b
    if kind == "OR":
        return a + b - a * b
    raise ValueError(f"unknown gate kind {kind!r}")


def _var_index(e: Expr, role: str) -> int:
    if len(e.terms) != 1:
        raise ValueError(f"{role} operand must be a single registered variable")
    (m, c), = e.terms.items()
    if len(m) != 1 or c != 1.0:
        raise ValueError(f"{role} operand must be a single registered variable")
    (i,) = m
    return i


def gate_penalty(kind: str, a: Expr, b: Expr, c: Expr | None = None) -> Expr:
    """Quadratic penalty that is 0 exactly when the gate relation holds.

    Relations: c = AND(a, b), c = OR(a, b), b = NOT(a).  Any violating
    assignment has penalty >= 1 (values up to 3 for AND at (0,0,1)).
    """
    ia = _var_index(a, "first")
    ib = _var_index(b, "second")
    reg = a.registry
    if b.registry is not reg or (c is not None and c.registry is not reg):
        raise ValueError("operands belong to different registries")
    if kind == "NOT":
        if c is not None:
            raise ValueError("NOT takes two operands")
        # 2ab - a - b + 1
        return Expr(reg, {
            Monomial((ia, ib)): 2.0,
            Monomial((ia,)): -1.0,
            Monomial((ib,)): -1.0,
            Monomial(): 1.0,
        })
    if c is None:
        raise ValueError(f"{kind} requires an output operand")
    ic = _var_index(c, "output")
    if kind == "AND":
        # ab - 2c(a+b) + 3c
        return Expr(reg, {
            Monomial((ia, ib)): 1.0,
            Monomial((ia, ic)): -2.0,
            Monomial((ib, ic)): -2.0,
            Monomial((ic,)): 3.0,
        })
    if kind == "OR":
        # ab - 2ac - 2bc + a + b + c
        return Expr(reg, {
            Monomial((ia, ib)): 1.0,
            Monomial((ia, ic)): -2.0,
            Monomial((ib, ic)): -2.0,
            Monomial((ia,)): 1.0,
            Monomial((ib,)): 1.0,
            Monomial((ic,)): 1.0,
        })
    raise ValueError(f"unknown gate kind {kind!r}")


# -- quadratization --------------------------------------------------------

def quadratize(e: Expr, strength: float | None = None) -> Expr:
    """Reduce to degree <= 2 via pairwise product substitution.

    Inside each degree->=3 monomial the lexicographically smallest variable
    pair (u, v) is replaced by a fresh auxiliary z, with an added AND-gate
    penalty M*(uv - 2uz - 2vz + 3z).  One auxiliary is reused per distinct
    pair.  With the automatic strength M = 1 + sum of |coefficient| over the
    monomials the pair was substituted into, minimizing over the auxiliaries
    recovers the original value at every original-variable assignment.
    """
    if strength is not None and strength <= 0:
        raise ValueError("strength must be positive")
    if e.degree <= 2:
        return Expr(e.registry, dict(e.terms), e.labels)

    reg = e.registry
    terms = dict(e.terms)
    pair_aux: dict[tuple[int, int], int] = {}
    pair_weight: dict[tuple[int, int], float] = {}

    while True:
        high = sorted((m for m in terms if len(m) >= 3), key=lambda m: sorted(m))
        if not high:
            break
        for m in high:
            coeff = terms.pop(m)
            u, v = sorted(m)[:2]
            z = pair_aux.get((u, v))
            if z is None:
                aux = reg.binary(f"_prod({reg.name(u)},{reg.name(v)})")
                z = next(iter(next(iter(aux.terms))))
                pair_aux[(u, v)] = z
                pair_weight[(u, v)] = 0.0
            pair_weight[(u, v)] += abs(coeff)
            reduced = (m - {u, v}) | {z}
            terms[reduced] = terms.get(reduced, 0.0) + coeff

    for (u, v), z in pair_aux.items():
        m_uv = strength if strength is not None else 1.0 + pair_weight[(u, v)]
        for mono, c in {
            Monomial((u, v)): 1.0,
            Monomial((u, z)): -2.0,
            Monomial((v, z)): -2.0,
            Monomial((z,)): 3.0,
        }.items():
            terms[mono] = terms.get(mono, 0.0) + m_uv * c

    return Expr(reg, terms, e.labels)


# -- compiled models -------------------------------------------------------

@dataclass(frozen=True)
class CompiledModel:
    """Indexed QUBO: linear + upper-triangular quadratic terms + offset."""

    num_vars: int
    linear: dict[int, float]
    quadratic: dict[tuple[int, int], float]
    offset: float
    labels: dict[str, Expr] = field(default_factory=dict)
    registry: Registry | None = None

    def _check_assignment(self, assignment) -> None:
        if len(assignment) != self.num_vars:
            raise ValueError(
                f"assignment length {len(assignment)} != num_vars {self.num_vars}"
            )
        for b in assignment:
            if b not in (0, 1):
                raise ValueError(f"non-binary assignment entry {b!r}")

    def energy(self, assignment) -> float:
        """offset + sum of linear and quadratic terms over the set bits."""
        self._check_assignment(assignment)
        total = self.offset
        for i, c in self.linear.items():
            if assignment[i]:
                total += c
        for (i, j), c in self.quadratic.items():
            if assignment[i] and assignment[j]:
                total += c
        return total

    def to_ising(self) -> "IsingModel":
        """Spin form under s = 2x - 1: E = offset + sum h_i s_i + sum J_ij s_i s_j."""
        h: dict[int, float] = {}
        offset = self.offset
        for i, c in self.linear.items():
            h[i] = h.get(i, 0.0) + c / 2.0
            offset += c / 2.0
        jmat: dict[tuple[int, int], float] = {}
        for (i, j), c in self.quadratic.items():
            jmat[(i, j)] = jmat.get((i, j), 0.0) + c / 4.0
            h[i] = h.get(i, 0.0) + c / 4.0
            h[j] = h.get(j, 0.0) + c / 4.0
            offset += c / 4.0
        return IsingModel(
            J={k: v for k, v in jmat.items() if v != 0.0},
            h={k: v for k, v in h.items() if v != 0.0},
            offset=offset,
        )

    def constraint_residuals(self, assignment) -> dict[str, float]:
        """Evaluate every labeled sub-expression; all-zero means fully satisfied."""
        self._check_assignment(assignment)
        return {name: sub.value(assignment) for name, sub in self.labels.items()}

    def to_qubo_text(self) -> str:
        """Deterministic text export: `p qubo n terms`, `i j coeff` lines, `offset`."""
        entries: dict[tuple[int, int], float] = {(i, i): c for i, c in self.linear.items()}
        entries.update(self.quadratic)
        lines = [f"p qubo {self.num_vars} {len(entries)}"]
        for (i, j) in sorted(entries):
            lines.append(f"{i} {j} {entries[(i, j)]:.17g}")
        lines.append(f"offset {self.offset:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class IsingModel:
    """Spin model with E = offset + sum h_i s_i + sum J_ij s_i s_j, s in {-1,1}."""

    J: dict[tuple[int, int], float]
    h: dict[int, float]
    offset: float

    def energy(self, spins) -> float:
        total = self.offset
        for i, c in self.h.items():
            total += c * spins[i]
        for (i, j), c in self.J.items():
            total += c * spins[i] * spins[j]
        return total
