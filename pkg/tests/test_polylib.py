import itertools
import math
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualdeg.errors import ArityError, DegenerateNodes, InvalidParams
from dualdeg.polylib import (CubeFn, MultilinearPoly, UnivariatePoly, block_product,
                             expand_in_basis, helper_p, helper_p_from_basis, inner_product,
                             lagrange_interpolate, pk_basis, pk_leading, pure_high_degree,
                             tensor_power)

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def cube_fns(draw, min_arity=1, max_arity=4):
    m = draw(st.integers(min_arity, max_arity))
    return CubeFn.from_values(m, draw(st.lists(fracs, min_size=1 << m, max_size=1 << m)))


@st.composite
def polys(draw, arity):
    terms = draw(st.dictionaries(st.integers(0, (1 << arity) - 1), fracs, max_size=6))
    return MultilinearPoly(arity, terms)


def naive_phd(psi: CubeFn) -> int:
    """Largest d with sum_x psi(x) prod_{i in S} x_i = 0 for every |S| <= d."""
    m = psi.arity
    vals = psi.values()
    for d in range(m + 1):
        for S in range(1 << m):
            if bin(S).count("1") == d:
                if sum(v for x, v in enumerate(vals) if x & S == S) != 0:
                    return d - 1
    return m


def parity_signs(m):
    return [(-1) ** bin(x).count("1") for x in range(1 << m)]


# ---------------------------------------------------------------- inner product, pure high degree

def test_inner_product_examples():
    m = 3
    assert inner_product(CubeFn.zeros(m), MultilinearPoly.constant(m, 5)) == 0
    uniform = CubeFn.from_values(m, [Fraction(1, 8)] * 8)
    assert inner_product(uniform, MultilinearPoly.constant(m, 1)) == 1
    psi = CubeFn.from_values(2, [Fraction(s, 4) for s in parity_signs(2)])
    assert inner_product(psi, MultilinearPoly.variable(2, 0)) == 0


def test_inner_product_arity_mismatch():
    with pytest.raises(ArityError):
        inner_product(CubeFn.zeros(2), MultilinearPoly.constant(3, 1))


@given(cube_fns(), st.data())
def test_inner_product_is_bilinear(psi, data):
    p, q = data.draw(polys(psi.arity)), data.draw(polys(psi.arity))
    c = data.draw(fracs)
    assert inner_product(psi, p + q.scale(c)) == inner_product(psi, p) + c * inner_product(psi, q)
    direct = sum((v * p.evaluate(x) for x, v in enumerate(psi.values())), Fraction(0))
    assert inner_product(psi, p) == direct


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_phd_examples(m):
    assert pure_high_degree(CubeFn.from_values(m, [Fraction(1, 2 ** m)] * (1 << m))) == -1
    assert pure_high_degree(CubeFn.from_values(m, parity_signs(m))) == m - 1
    assert pure_high_degree(CubeFn.zeros(m)) == m


@given(cube_fns())
def test_phd_matches_naive(psi):
    assert pure_high_degree(psi) == naive_phd(psi)


@given(cube_fns(), fracs.filter(bool))
def test_phd_scale_invariant(psi, c):
    assert pure_high_degree(psi.scale(c)) == pure_high_degree(psi)


@given(st.integers(1, 3), st.data())
def test_phd_adds_under_block_products(m, data):
    a = data.draw(cube_fns(m, m))
    b = data.draw(cube_fns(m, m))
    if a.is_zero() or b.is_zero():
        return
    assert pure_high_degree(block_product([a, b])) == pure_high_degree(a) + pure_high_degree(b) + 1


@given(cube_fns())
def test_cubefn_json_round_trip(psi):
    assert CubeFn.from_json(json.loads(json.dumps(psi.to_json()))) == psi


@given(st.integers(1, 4), st.data())
def test_multilinear_table_round_trip(m, data):
    p = data.draw(polys(m))
    assert MultilinearPoly.from_table(p.table()) == p
    t = p.table()
    assert all(t[x] == p.evaluate(x) for x in range(1 << m))


# ---------------------------------------------------------------- univariate

def newton_value(nodes, x):
    """Independent evaluation via divided differences."""
    xs = [Fraction(a) for a, _ in nodes]
    coef = [Fraction(b) for _, b in nodes]
    for j in range(1, len(xs)):
        for i in range(len(xs) - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    acc = Fraction(0)
    for i in range(len(xs) - 1, -1, -1):
        acc = acc * (x - xs[i]) + coef[i]
    return acc


def test_lagrange_examples():
    assert lagrange_interpolate([(0, 1), (1, -1)]) == UnivariatePoly((1, -2))
    assert lagrange_interpolate([(0, 1)]) == UnivariatePoly((1,))
    nodes = [(0, 1), (1, -3), (2, 9)]
    P = lagrange_interpolate(nodes)
    assert [P(x) for x in range(3)] == [1, -3, 9]
    assert P(3) == newton_value(nodes, 3) == 37


def test_lagrange_duplicate_nodes():
    with pytest.raises(DegenerateNodes):
        lagrange_interpolate([(0, 1), (0, 2)])


@given(st.lists(st.tuples(st.integers(-8, 8), fracs), min_size=1, max_size=7,
                unique_by=lambda t: t[0]), st.integers(-10, 10))
def test_lagrange_matches_newton(nodes, x):
    P = lagrange_interpolate(nodes)
    assert P.degree < len(nodes)
    assert all(P(a) == b for a, b in nodes)
    assert P(x) == newton_value(nodes, x)


# ---------------------------------------------------------------- helper P

@pytest.mark.parametrize("a,n,eps", [(40, 10, Fraction(3, 5)), (64, 20, Fraction(3, 4)),
                                     (2, 7, Fraction(2, 3))])
def test_helper_examples(a, n, eps):
    P, rep = helper_p(a, n, eps)
    assert P(0) == 1
    assert P(1) == -a
    assert rep.interpolation_ok
    assert P.degree <= (1 + Fraction(10, a)) * eps * n + 3
    assert rep.degree_ok


@pytest.mark.parametrize("a,n,eps", [(40, 12, Fraction(3, 5)), (5, 9, Fraction(2, 3))])
def test_helper_basis_form_agrees(a, n, eps):
    P, _ = helper_p(a, n, eps)
    assert helper_p_from_basis(a, n, eps) == P


def test_helper_tail_points_checked_exactly():
    a, n, eps = 40, 30, Fraction(3, 5)
    P, rep = helper_p(a, n, eps)
    xs = [x for x, _ in rep.point_checks]
    assert xs == list(range(18 + 1, n + 1))
    for x, ok in rep.point_checks:
        assert ok == (2 * abs(P(x)) <= Fraction(a) ** x)


@pytest.mark.parametrize("eps", [Fraction(1, 2), Fraction(1), Fraction(1, 3)])
def test_helper_bad_eps(eps):
    with pytest.raises(InvalidParams):
        helper_p(40, 10, eps)


# ---------------------------------------------------------------- P_k basis

def test_pk_examples():
    basis = pk_basis(6, Fraction(1, 3), 3)
    assert all(basis[0](m) == 1 for m in range(7))
    for k, P in enumerate(basis):
        assert P.degree == k
        assert P.leading == pk_leading(k, Fraction(1, 3))
        assert P.leading == Fraction((-1) ** k * 4 ** k, math.factorial(k))
    assert expand_in_basis(basis[2], basis) == [0, 0, 1, 0]


def test_pk_definition():
    n, alpha = 5, Fraction(2, 7)
    basis = pk_basis(n, alpha, 3)
    for k in range(4):
        for m in range(n + 1):
            direct = sum(math.comb(m, i) * math.comb(n - m, k - i) * (-alpha) ** (-i) for i in range(k + 1))
            assert basis[k](m) == direct


def test_pk_alpha_zero():
    with pytest.raises(InvalidParams):
        pk_basis(4, 0, 2)


@given(st.integers(2, 8), st.fractions(min_value=Fraction(1, 9), max_value=3, max_denominator=9),
       st.data())
def test_expand_reproduces_q(n, alpha, data):
    d = data.draw(st.integers(0, n))
    Q = UnivariatePoly(tuple(data.draw(st.lists(fracs, min_size=0, max_size=d + 1))))
    basis = pk_basis(n, alpha, d)
    beta = expand_in_basis(Q, basis)
    for m in range(n + 1):
        assert sum((b * P(m) for b, P in zip(beta, basis)), Fraction(0)) == Q(m)


# ---------------------------------------------------------------- block products

def test_block_product_layout():
    a = CubeFn.from_values(1, [1, 2])
    b = CubeFn.from_values(1, [3, 5])
    p = block_product([a, b])
    # block 0 is bit 0
    assert p.values() == [3, 6, 5, 10]
    assert tensor_power(a, 2).values() == [1, 2, 2, 4]


@given(cube_fns(max_arity=2), st.integers(1, 3))
def test_tensor_power_pointwise(phi, n):
    psi = tensor_power(phi, n)
    M = phi.arity
    for xs in itertools.product(range(1 << M), repeat=n):
        x = sum(v << (i * M) for i, v in enumerate(xs))
        expect = Fraction(1)
        for v in xs:
            expect *= phi[v]
        assert psi[x] == expect
