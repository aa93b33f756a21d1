from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from dualdeg.errors import MalformedLP
from dualdeg.lp import LPInstance, Sense, SolverMode, Status, dual_instance, solve_lp

LE, GE, EQ = Sense.LE, Sense.GE, Sense.EQ


def float_optimum(inst: LPInstance):
    """Independent float solve with HiGHS: (status, objective in the instance's sense)."""
    n = inst.n_vars
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, s, b in zip(inst.rows, inst.senses, inst.rhs):
        v = np.zeros(n)
        for j, c in row.items():
            v[j] = float(c)
        if s == LE:
            A_ub.append(v); b_ub.append(float(b))
        elif s == GE:
            A_ub.append(-v); b_ub.append(-float(b))
        else:
            A_eq.append(v); b_eq.append(float(b))
    c = np.array([float(v) for v in inst.min_cost()])
    bounds = [(None, None) if j in inst.free else (0, None) for j in range(n)]
    res = linprog(c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    val = None if res.status != 0 else (-res.fun if inst.maximize else res.fun)
    return res.status, val


def test_simple_max():
    res = solve_lp(LPInstance([1], [{0: 1}], [LE], [3], maximize=True))
    assert res.status == Status.OPTIMAL
    assert res.x == [3] and res.objective == 3


def test_infeasible_with_certificate():
    inst = LPInstance([1], [{0: 1}, {0: 1}], [LE, GE], [1, 2], maximize=True)
    res = solve_lp(inst)
    assert res.status == Status.INFEASIBLE
    assert inst.farkas_valid(res.farkas)


def test_unbounded():
    inst = LPInstance([1, 0], [{0: 1, 1: -1}], [LE], [1], maximize=True)
    res = solve_lp(inst)
    assert res.status == Status.UNBOUNDED


def beale():
    c = [Fraction(-3, 4), 20, Fraction(-1, 2), 6]
    rows = [{0: Fraction(1, 4), 1: -8, 2: -1, 3: 9},
            {0: Fraction(1, 2), 1: -12, 2: Fraction(-1, 2), 3: 3},
            {2: 1}]
    return LPInstance(c, rows, [LE, LE, LE], [0, 0, 1])


@pytest.mark.parametrize("mode", list(SolverMode))
def test_beale_terminates(mode):
    inst = beale()
    res = solve_lp(inst, mode=mode, dualize=False)
    assert res.status == Status.OPTIMAL
    assert res.objective == Fraction(-5, 4)
    status, val = float_optimum(inst)
    assert status == 0 and abs(val - float(res.objective)) < 1e-9


def test_malformed():
    with pytest.raises(MalformedLP):
        LPInstance([1], [{3: 1}], [LE], [1])
    with pytest.raises(MalformedLP):
        LPInstance([1], [{0: 1}], [LE, LE], [1])
    with pytest.raises(MalformedLP):
        solve_lp("not an instance")


small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def lps(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 5))
    rows = [{j: draw(small) for j in range(n)} for _ in range(m)]
    senses = draw(st.lists(st.sampled_from([LE, GE, EQ]), min_size=m, max_size=m))
    rhs = draw(st.lists(small, min_size=m, max_size=m))
    obj = draw(st.lists(small, min_size=n, max_size=n))
    free = set(draw(st.lists(st.integers(0, n - 1), max_size=n)))
    # a box keeps most instances bounded
    for j in range(n):
        rows.append({j: 1}); senses.append(LE); rhs.append(Fraction(5))
        rows.append({j: 1}); senses.append(GE); rhs.append(Fraction(-5))
    return LPInstance(obj, rows, senses, rhs, maximize=draw(st.booleans()), free=free)


@given(lps(), st.sampled_from(list(SolverMode)), st.booleans())
def test_matches_float_oracle(inst, mode, dualize):
    res = solve_lp(inst, mode=mode, dualize=dualize)
    status, val = float_optimum(inst)
    if res.status == Status.OPTIMAL:
        assert status == 0
        assert abs(float(res.objective) - val) < 1e-7
        assert inst.is_feasible(res.x)
        assert inst.dual_feasible(res.dual)
    elif res.status == Status.INFEASIBLE:
        assert status == 2
        assert inst.farkas_valid(res.farkas)


@given(lps())
def test_dual_instance_has_same_value(inst):
    primal = solve_lp(inst, dualize=False)
    if primal.status != Status.OPTIMAL:
        return
    dual = solve_lp(dual_instance(inst), dualize=False)
    assert dual.status == Status.OPTIMAL
    target = -primal.objective if inst.maximize else primal.objective
    assert -dual.objective == target
