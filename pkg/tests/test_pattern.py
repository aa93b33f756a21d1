import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualdeg.amplify import upp_witness
from dualdeg.boolfn import Convention, PartialBoolFn, all_total_functions, gen_named
from dualdeg.degree import approx_degree, threshold_degree
from dualdeg.dist import Distribution
from dualdeg.errors import (DimensionMismatch, InvalidInput, InvalidParams, NotOrthogonalizing,
                            TooLarge)
from dualdeg.pattern import (orthogonalizing_distribution, pattern_matrix, smoothness_report,
                             symmetrize_ptp, verify_sign_factorization)
from dualdeg.polylib import CubeFn
from dualdeg.verify import composed_function

PM = Convention.PLUS_MINUS


def pm(name, m, **kw):
    return gen_named(name, m, convention=PM, **kw)


def brute_entry(phi, N, n, x, choice, w):
    block = N // n
    u = 0
    for j, c in enumerate(choice):
        u |= ((x >> (j * block + c)) & 1) << j
    return int(phi.sign_table()[u ^ w])


# ---------------------------------------------------------------- pattern matrices

@pytest.mark.parametrize("N,n", [(2, 2), (4, 2), (3, 1), (6, 3), (6, 2)])
def test_dimensions_and_entries(N, n):
    phi = pm("XOR", n) if n > 1 else PartialBoolFn.from_callable(1, lambda x: x, convention=PM)
    M = pattern_matrix(phi, N, n)
    block = N // n
    assert M.shape == M.entries.shape == (2 ** N, block ** n * 2 ** n)
    for s_index, choice in enumerate(itertools.product(range(block), repeat=n)):
        choice = choice[::-1]
        assert sum(c * block ** j for j, c in enumerate(choice)) == s_index
        for w in range(2 ** n):
            col = s_index * 2 ** n + w
            for x in range(2 ** N):
                assert M.entries[x, col] == brute_entry(phi, N, n, x, choice, w)
                assert M.entry(x, col) == M.entries[x, col]


def test_n_equals_N_is_shift_matrix():
    phi = pm("AND", 2)
    M = pattern_matrix(phi, 2, 2)
    s = phi.sign_table()
    assert M.shape == (4, 4)
    for x in range(4):
        for w in range(4):
            assert M.entries[x, w] == s[x ^ w]


def test_total_has_no_zeros_partial_has_zeros():
    assert (pattern_matrix(pm("MAJ", 3), 6, 3).entries != 0).all()
    part = PartialBoolFn.from_dict(2, {"00": 0, "11": 1}, convention=PM)
    assert (pattern_matrix(part, 4, 2).entries == 0).any()


def test_pattern_errors():
    with pytest.raises(InvalidParams):
        pattern_matrix(gen_named("XOR", 2), 4, 2)
    with pytest.raises(InvalidParams):
        pattern_matrix(pm("XOR", 2), 5, 2)
    with pytest.raises(TooLarge):
        pattern_matrix(pm("XOR", 2), 8, 2, cap=1000)
    lazy = pattern_matrix(pm("XOR", 2), 8, 2, cap=1000, lazy=True)
    dense = pattern_matrix(pm("XOR", 2), 8, 2)
    assert lazy.entries is None and lazy.shape == dense.shape
    for x, col in [(0, 0), (5, 17), (255, 63), (100, 40)]:
        assert lazy.entry(x, col) == dense.entries[x, col]
    with pytest.raises(TooLarge):
        lazy.to_csv("unused.csv")


def test_csv_and_labels(tmp_path):
    M = pattern_matrix(pm("XOR", 2), 4, 2)
    M.to_csv(tmp_path / "m.csv")
    M.write_labels(tmp_path / "labels.json")
    rows = [list(map(int, line.split(","))) for line in (tmp_path / "m.csv").read_text().split()]
    assert np.array_equal(np.array(rows), M.entries)
    labels = json.loads((tmp_path / "labels.json").read_text())
    assert len(labels["rows"]) == 16 and len(labels["columns"]) == 16
    assert labels["rows"][1] == "1000"
    # column 4 * s_index + w; s_index 1 picks the second coordinate of block 0
    assert labels["columns"][5] == {"S": [2, 3], "w": "10"}


# ---------------------------------------------------------------- orthogonalizing distributions

def test_parity_uniform():
    h = pm("XOR", 3)
    psi = CubeFn.from_values(3, [Fraction(int(s), 8) for s in h.sign_table()])
    mu, d = orthogonalizing_distribution(psi, h)
    assert mu == Distribution.uniform(mu.domain) and d == 2


def test_point_mass():
    h = pm("CONST1", 2)
    psi = CubeFn.from_dict(2, {"01": Fraction(int(h.sign_table()[2]), 3)})
    mu, d = orthogonalizing_distribution(psi, h)
    assert mu.support == ["01"] and mu["01"] == 1
    assert d == -1


def test_not_orthogonalizing():
    h = pm("XOR", 2)
    psi = CubeFn.from_values(2, [Fraction(int(s), 4) for s in h.sign_table()]).scale(-1)
    with pytest.raises(NotOrthogonalizing):
        orthogonalizing_distribution(psi, h)
    with pytest.raises(NotOrthogonalizing):
        orthogonalizing_distribution(CubeFn.zeros(2), h)


def xor2_bundle():
    f = gen_named("XOR", 2)
    mu = approx_degree(f, Fraction(49, 100)).dual
    b = upp_witness(mu, f, 4, Fraction(3, 4), "GAPMAJ", Fraction(49, 100))
    return b, composed_function(f, 4, Fraction(3, 4), "GAPMAJ")


def test_amplified_witness_distribution():
    b, F = xor2_bundle()
    mu, d = orthogonalizing_distribution(b.psi, F)
    dom = F.domain_mask()
    cube = mu.to_cubefn()
    assert cube.masked_l1(~dom) == 0
    assert d == b.claimed_bound == 1
    # supported on the 16 all-ONE and 16 all-ZERO block tuples, uniformly
    assert len(mu.support) == 32 and set(mu.mass.values()) == {Fraction(1, 32)}
    rep = smoothness_report(mu, d, 1)
    assert rep.fraction == Fraction(7, 8) and rep.below == 224


@pytest.mark.parametrize("f", [f for f in all_total_functions(3)][::7])
def test_orthogonalizing_matches_verified_degree(f):
    r = threshold_degree(f)
    if r.dual is None:
        return
    mu, d = orthogonalizing_distribution(r.dual, f)
    assert d == r.dual_report.pure_high_degree


# ---------------------------------------------------------------- symmetrization

@pytest.mark.parametrize("fvec,expected", [((1, 2, 3), (1, 1, 1)), ((1, 1, 1), (0, 0, 3)),
                                           ((1, 1, 2), (0, 1, 2)), ((4, 4, 1, 3), (0, 1, 1, 2))])
def test_symmetrize_examples(fvec, expected):
    assert symmetrize_ptp(fvec) == expected


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, 4, 1), (1.0, 1, 1), (True, 1, 1)])
def test_symmetrize_rejects(bad):
    with pytest.raises(InvalidInput):
        symmetrize_ptp(bad)


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1, n), min_size=n, max_size=n), st.permutations(range(n)),
    st.permutations(range(1, n + 1)))))
def test_symmetrize_invariance(data):
    f, perm, relabel = data
    s = symmetrize_ptp(f)
    assert sum(s) == len(f) and list(s) == sorted(s)
    assert symmetrize_ptp([f[i] for i in perm]) == s
    assert symmetrize_ptp([relabel[v - 1] for v in f]) == s


# ---------------------------------------------------------------- smoothness

@pytest.mark.parametrize("alpha,d", [(0, 0), (1, 1), (Fraction(1, 3), 5)])
def test_uniform_is_smooth(alpha, d):
    mu = Distribution.from_cubefn(CubeFn.from_values(3, [Fraction(1, 8)] * 8))
    assert smoothness_report(mu, d, alpha).fraction == 0


@pytest.mark.parametrize("n", [1, 2, 4])
def test_point_mass_smoothness(n):
    mu = CubeFn.from_dict(n, {"0" * n: 1})
    assert smoothness_report(mu, 1, 1).fraction == Fraction(2 ** n - 1, 2 ** n)


def test_smoothness_irrational_threshold():
    # threshold 2^(-1/2) / 4 = 0.1767...; 1/6 is below, 3/16 is above
    mu = CubeFn.from_values(2, [Fraction(1, 6), Fraction(3, 16), Fraction(1, 3), Fraction(5, 16)])
    rep = smoothness_report(mu, 1, Fraction(1, 2))
    assert rep.below == 1


# ---------------------------------------------------------------- sign factorization

def test_all_ones_rank_one():
    M = np.ones((3, 4), dtype=np.int8)
    assert verify_sign_factorization(M, [[1]] * 3, [[1]] * 4)


def test_sign_nonsingular_block_not_rank_one():
    M = np.array([[1, 1], [1, -1]])
    for u in itertools.product([-2, -1, 1, 2], repeat=2):
        for v in itertools.product([-2, -1, 1, 2], repeat=2):
            assert not verify_sign_factorization(M, [[a] for a in u], [[b] for b in v])
    assert verify_sign_factorization(M, [[1, 0], [1, 1]], [[1, 0], [0, -2]]) is False
    assert verify_sign_factorization(M, [[1, 1], [1, -1]], [[1, 0], [0, 1]])


def test_checkerboard_is_rank_one():
    M = np.array([[1, -1], [-1, 1]])
    assert verify_sign_factorization(M, [[1], [-1]], [[1], [-1]])


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_self_factorization(r, c, data):
    M = np.array(data.draw(st.lists(st.lists(st.sampled_from([-1, 1]), min_size=c, max_size=c),
                                    min_size=r, max_size=r)))
    I = [[int(i == j) for j in range(c)] for i in range(c)]
    assert verify_sign_factorization(M, M.tolist(), I)


def test_zero_entries_unconstrained():
    M = pattern_matrix(PartialBoolFn.from_dict(1, {"1": 1}, convention=PM), 1, 1)
    assert M.entries.tolist() == [[0, -1], [-1, 0]]
    assert verify_sign_factorization(M, [[1], [1]], [[-1], [-1]])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        verify_sign_factorization(np.ones((2, 2)), [[1]], [[1], [1]])
    with pytest.raises(DimensionMismatch):
        verify_sign_factorization(np.ones((2, 2)), [[1], [1, 2]], [[1], [1]])
