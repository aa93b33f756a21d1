import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualdeg.amplify import error_correct, upp_witness
from dualdeg.boolfn import PartialBoolFn, all_total_functions, gen_named, point_to_bits
from dualdeg.degree import approx_degree, onesided_degree, threshold_degree
from dualdeg.errors import ArityError, CertificateRejected
from dualdeg.polylib import CubeFn, block_counts, tensor_power
from dualdeg.verify import (DualKind, certify_amplification, composed_function, correlation,
                            verify_dual, verify_error_correction)

EPS2 = Fraction(49, 100)


def parity_sign(m):
    return CubeFn.from_values(m, [Fraction((-1) ** (bin(x).count("1") + 1), 1 << m)
                                  for x in range(1 << m)])


def test_parity_witness():
    f = gen_named("XOR", 3)
    rep = verify_dual(parity_sign(3), f, DualKind.APPROX, 2, EPS2)
    assert rep.verdict
    assert rep.check("correlation_exceeds_eps").value == Fraction(1, 2)
    assert rep.pure_high_degree == 2


def test_correlation_tie_fails():
    f = gen_named("XOR", 3)
    rep = verify_dual(parity_sign(3), f, DualKind.APPROX, 2, Fraction(1, 2))
    assert not rep.verdict and rep.failed() == ["correlation_exceeds_eps"]


def test_zero_is_trivial():
    rep = verify_dual(CubeFn.zeros(2), gen_named("AND", 2), DualKind.THRESHOLD, 0)
    assert rep.failed() == ["nontrivial"]


def test_support_check():
    f = PartialBoolFn.from_dict(2, {"00": 0, "11": 1})
    psi = CubeFn.from_dict(2, {"00": Fraction(-1, 2), "11": Fraction(1, 2), "10": Fraction(1, 8)})
    rep = verify_dual(psi, f, DualKind.THRESHOLD, -1)
    assert "support_in_domain" in rep.failed()
    ok = CubeFn.from_dict(2, {"00": Fraction(-1, 2), "11": Fraction(1, 2)})
    assert verify_dual(ok, f, DualKind.THRESHOLD, 0).verdict


def test_onesided_checks():
    f = gen_named("OR", 2)
    r = onesided_degree(f, Fraction(1, 3))
    assert verify_dual(r.dual, f, DualKind.ONESIDED, 0, Fraction(1, 3)).verdict
    flipped = r.dual.scale(-1)
    assert "nonpositive_on_zeros" in verify_dual(flipped, f, DualKind.ONESIDED, 0, 0).failed()


def test_arity_mismatch():
    with pytest.raises(ArityError):
        verify_dual(parity_sign(2), gen_named("XOR", 3), DualKind.APPROX, 1, 0)


def test_report_json():
    rep = verify_dual(parity_sign(3), gen_named("XOR", 3), "approx", 2, EPS2)
    obj = rep.to_json()
    assert obj["verdict"] == "PASS" and obj["kind"] == "APPROX_DUAL"
    assert {c["name"] for c in obj["checks"]} == {"pure_high_degree", "unit_l1_norm",
                                                   "correlation_exceeds_eps"}


# ---------------------------------------------------------------- error correction

def test_error_correction_alpha_zero():
    f = gen_named("XOR", 2)
    mu = approx_degree(f, EPS2).dual
    phi = mu.positive_part()
    rep = verify_error_correction(CubeFn.zeros(12), phi, f.ones_mask(), 6, Fraction(3, 4))
    assert rep.verdict
    psi = tensor_power(phi, 6)
    nA = block_counts(f.ones_mask(), 6)
    assert all(psi[x] == 0 for x in range(psi.size) if nA[x] * 4 <= 18)


def test_error_correction_mutation():
    phi = CubeFn.from_values(1, [80, 1])
    A = np.array([True, False])
    n, eps = 16, Fraction(3, 5)
    e = error_correct(phi, A, n, eps)
    assert e.report.verdict and e.constructed_bound == 2
    psi = tensor_power(phi, n)
    nA = block_counts(A, n)
    # a point above the threshold with slack in the damping bound
    x = next(x for x in range(psi.size)
             if nA[x] * 5 > 3 * n and 4 * abs(e.psi_corr[x]) < psi[x])
    bump = CubeFn.from_dict(n, {point_to_bits(x, n): psi[x] / 8})
    rep = verify_error_correction(e.psi_corr + bump, phi, A, n, eps, deg_P=e.P.degree)
    assert rep.failed() == ["phd_vs_constructed"]


# ---------------------------------------------------------------- certificates

def test_certify_xor2_n8():
    f = gen_named("XOR", 2)
    mu = approx_degree(f, EPS2).dual
    b = upp_witness(mu, f, 8, Fraction(3, 4), "GAPMAJ", EPS2)
    cert = certify_amplification(b)
    assert cert.accepted and cert.bound >= 1 and cert.upp_dt_lower == cert.bound + 1
    scaled = dataclasses.replace(b, psi=b.psi.scale(7))
    assert certify_amplification(scaled).accepted


def test_certify_rejects_two_sided_gapand():
    # the NOR2 dual puts positive mass on f = 0 (alpha_plus = 1); with 4 or 5 ONE blocks out
    # of 6 the GapMaj witness survives the correction, but GapAND is undefined there
    f = gen_named("OR", 2).complement()
    mu = approx_degree(f, 0).dual
    b = upp_witness(mu, f, 6, Fraction(7, 12), "GAPMAJ", 0, override=True)
    assert b.alphas == (1, 0)
    assert certify_amplification(b).accepted
    with pytest.raises(CertificateRejected) as e:
        certify_amplification(dataclasses.replace(b, mode="GAPAND"))
    assert e.value.report.failed() == ["support_in_domain"]


def test_certify_gapand_onesided():
    f = PartialBoolFn.from_dict(2, {"00": 0, "10": 1, "01": 1})
    mu = onesided_degree(f, EPS2).dual
    b = upp_witness(mu, f, 4, Fraction(3, 4), "GAPAND", EPS2)
    assert certify_amplification(b).accepted
    F = composed_function(f, 4, Fraction(3, 4), "GAPAND")
    assert b.psi.masked_l1(~F.domain_mask()) == 0


# ---------------------------------------------------------------- properties

TOTAL3 = [f for f in all_total_functions(3)]


@given(st.sampled_from(TOTAL3), st.fractions(min_value=Fraction(1, 9), max_value=9,
                                             max_denominator=9))
def test_threshold_scale_invariance(f, c):
    r = threshold_degree(f)
    if r.dual is None:
        return
    d = r.degree - 1
    assert verify_dual(r.dual.scale(c), f, DualKind.THRESHOLD, d).verdict
    assert verify_dual(r.dual.scale(-c), f, DualKind.THRESHOLD, d).verdict is False


@given(st.sampled_from(TOTAL3), st.sampled_from(["approx", "threshold"]), st.data())
def test_single_point_mutation_detected(f, measure, data):
    r = threshold_degree(f) if measure == "threshold" else approx_degree(f, Fraction(1, 3))
    if r.dual is None:
        return
    kind = DualKind.THRESHOLD if measure == "threshold" else DualKind.APPROX
    eps = r.eps
    assert verify_dual(r.dual, f, kind, r.degree - 1, eps).verdict
    x = data.draw(st.integers(0, 7))
    delta = data.draw(st.fractions(min_value=Fraction(-9), max_value=9, max_denominator=16)
                      .filter(lambda v: v != 0))
    bumped = r.dual + CubeFn.from_dict(3, {point_to_bits(x, 3): delta})
    assert not verify_dual(bumped, f, kind, r.degree - 1, eps).verdict


def test_correlation_counts_off_domain_mass():
    f = PartialBoolFn.from_dict(1, {"1": 1})
    psi = CubeFn.from_values(1, [Fraction(-1, 4), Fraction(3, 4)])
    assert correlation(psi, f) == Fraction(3, 4) - Fraction(1, 4)
