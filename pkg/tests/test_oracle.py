import random

import numpy as np
import pytest

from qubosched.anneal import AnnealParams, best, sample
from qubosched.nsp import (
    InstanceError,
    NspInstance,
    Schedule,
    assemble,
    window_rule_feasible,
)
from qubosched.oracle import (
    ARGMIN_CAP,
    SizeError,
    brute_force_min,
    enumerate_feasible,
)
from qubosched.poly import Expr, Registry


def tiny_instance(m1, n1, d, k=2):
    return NspInstance(N=m1, m1=m1, m2=0, n1=n1, n2=0, n3=0, k=k, d=d)


class TestBruteForce:
    def test_two_variable_model(self):
        reg = Registry()
        x1, x2 = reg.binary("x1"), reg.binary("x2")
        res = brute_force_min((x1 + x2 + x1 * x2).compile())
        assert res.min_energy == 0.0
        assert res.argmins == ((0, 0),)
        assert not res.truncated

    def test_one_hot_argmins(self):
        reg = Registry()
        xs = [reg.binary(f"x{i}") for i in range(3)]
        res = brute_force_min(((sum(xs, Expr(reg)) - 1) ** 2).compile())
        assert res.min_energy == 0.0
        assert res.argmins == ((0, 0, 1), (0, 1, 0), (1, 0, 0))

    def test_constant_model(self):
        res = brute_force_min((Expr(Registry()) + 7).compile())
        assert res.min_energy == 7.0
        assert res.argmins == ((),)

    def test_var_limit(self):
        reg = Registry()
        e = sum((reg.binary(f"x{i}") for i in range(23)), Expr(reg))
        with pytest.raises(SizeError):
            brute_force_min(e.compile())
        assert brute_force_min(e.compile(), var_limit=23).min_energy == 0.0

    def test_argmin_cap_and_flag(self):
        # 2^11 degenerate minima exceed the cap
        reg = Registry()
        e = 0 * sum((reg.binary(f"x{i}") for i in range(11)), Expr(reg))
        res = brute_force_min(e.compile())
        assert res.truncated
        assert len(res.argmins) == ARGMIN_CAP

    def test_argmins_lexicographic_and_valid(self):
        rng = random.Random(5)
        for _ in range(10):
            reg = Registry()
            xs = [reg.binary(f"x{i}") for i in range(6)]
            e = Expr(reg)
            for i in range(6):
                e = e + rng.randint(-2, 2) * xs[i]
                for j in range(i + 1, 6):
                    if rng.random() < 0.5:
                        e = e + rng.randint(-2, 2) * xs[i] * xs[j]
            m = e.compile()
            res = brute_force_min(m)
            assert list(res.argmins) == sorted(res.argmins)
            for a in res.argmins:
                assert m.energy(a) == pytest.approx(res.min_energy, abs=1e-9)


class TestEnumerateFeasible:
    def test_two_nurse_two_day(self):
        scheds = enumerate_feasible(tiny_instance(2, 1, 2))
        assert len(scheds) == 2
        # lexicographic over the row-major bit vector
        assert np.array_equal(scheds[0].bits, [[0, 0], [1, 1]])
        assert np.array_equal(scheds[1].bits, [[1, 1], [0, 0]])

    def test_single_day_is_infeasible(self):
        # any working day is an isolated run, so n1 >= 1 cannot be met
        assert enumerate_feasible(tiny_instance(2, 1, 1)) == []

    def test_invalid_instance_rejected_up_front(self):
        with pytest.raises(InstanceError):
            tiny_instance(2, 2, 2)  # n1 = m1

    def test_cell_limit(self):
        inst = NspInstance(N=3, m1=3, m2=0, n1=1, n2=0, n3=0, k=2, d=7)
        with pytest.raises(SizeError):
            enumerate_feasible(inst)

    def test_week_bound_enforced(self):
        # two U3 nurses share 7 days one-per-day; rule 5 caps each at 5
        inst = NspInstance(N=2, m1=0, m2=0, n1=0, n2=0, n3=1, k=2, d=7,
                           first_weekday="Sat")
        scheds = enumerate_feasible(inst)
        assert scheds
        for s in scheds:
            assert np.array_equal(s.bits.sum(axis=0), np.ones(7))
            assert (s.bits.sum(axis=1) <= 5).all()


class TestEncodingAgreement:
    def test_hard_minimum_zero_and_projections_match(self):
        inst = tiny_instance(2, 1, 4)
        assert enumerate_feasible(inst)
        b = assemble(inst)
        res = brute_force_min(b.model)
        assert res.min_energy == 0.0
        seen = set()
        for a in res.argmins:
            bits = np.zeros((inst.N, inst.d), dtype=np.uint8)
            for (i, j), idx in b.var_map.items():
                bits[i - 1, j - 1] = a[idx]
            seen.add(tuple(bits.flatten()))
        window_ok = {
            tuple(s.bits.flatten())
            for s in enumerate_feasible(inst)
            if window_rule_feasible(s, inst)
        }
        assert seen == window_ok

    def test_sa_never_beats_oracle(self):
        rng = random.Random(17)
        for trial in range(8):
            reg = Registry()
            xs = [reg.binary(f"x{i}") for i in range(8)]
            e = Expr(reg)
            for i in range(8):
                e = e + rng.randint(-3, 3) * xs[i]
                for j in range(i + 1, 8):
                    if rng.random() < 0.4:
                        e = e + rng.randint(-3, 3) * xs[i] * xs[j]
            if not e.terms:
                continue
            m = e.compile()
            res = brute_force_min(m)
            ss = sample(m, AnnealParams(num_reads=5, num_sweeps=200, seed=trial))
            assert best(ss).energy >= res.min_energy - 1e-9
