import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from av4231.errors import (DimensionMismatch, InsufficientData, NonNegativityViolation,
                           NotConverged, ValidationError, ZeroStart)
from av4231.permcore import count_avoiders
from av4231.spectral import (Operator, certificate_vector, certify_lower_bound, count_words,
                             count_words_bigint, extrapolate, is_monotone, lambda_table,
                             parse_rational, power_iteration, read_certificate_vector, verify)

from conftest import matrix

ROOT2 = 2 + math.sqrt(2)


def counts(k, n, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return count_words(k, n, **kw).counts


def test_counts_small():
    for k in range(3, 7):
        assert counts(k, 4)[4] == 23
    assert counts(1, 5) == [1] * 6


def test_counts_match_bigint_and_matrix_free():
    for k in range(1, 7):
        want = count_words_bigint(k, 14, matrix(k))
        assert counts(k, 14, matrix=matrix(k)) == want
        assert counts(k, 14, mode="matrix-free") == want


def test_counts_match_oracle():
    for n, c in enumerate(counts(5, 9)):
        assert c == count_avoiders(n)
    for n, c in enumerate(counts(2, 6)):
        assert c == count_avoiders(n, slot_cap=2)


def test_counts_consistent_across_caps():
    table = {k: counts(k, 9) for k in range(3, 7)}
    for k in range(3, 7):
        for k2 in range(3, 7):
            for n in range(0, min(9, 2 * min(k, k2) - 1) + 1):
                assert table[k][n] == table[k2][n]


def test_counts_monotone_in_k():
    table = {k: counts(k, 10) for k in range(1, 7)}
    for k in range(1, 6):
        assert all(a <= b for a, b in zip(table[k], table[k + 1]))


def test_restricted_warning_and_flags():
    with pytest.warns(UserWarning):
        seq = count_words(3, 8)
    assert [seq.restricted(n) for n in range(9)] == [False] * 6 + [True] * 3
    assert seq.to_csv().splitlines()[6] == "5,103,0"
    count_words(3, 5)  # no warning expected at the boundary


def test_power_iteration_small():
    est = power_iteration(2, 1e-8, 10_000)
    assert abs(est.estimate - ROOT2) <= 1e-8
    assert est.lower <= ROOT2 <= est.upper
    assert power_iteration(1).estimate == 1.0
    assert est.lower <= est.estimate <= est.upper


def test_bracket_contains_root_every_iteration():
    A = matrix(2)
    op = Operator(2, A)
    for it in range(1, 30):
        try:
            power_iteration(2, 1e-300, it, op=op)
        except NotConverged as exc:
            e = exc.estimate
            assert e.lower <= ROOT2 <= e.upper
            assert np.all(e.vector > 0) and e.vector.max() == 1.0


def test_not_converged_carries_bracket():
    with pytest.raises(NotConverged) as info:
        power_iteration(6, 1e-12, 3)
    e = info.value.estimate
    assert e.iterations == 3 and e.lower < e.upper
    assert e.lower <= 7.5693 <= e.upper


def test_matrix_free_agrees():
    a = power_iteration(7, 1e-9)
    b = power_iteration(7, 1e-9, mode="matrix-free")
    assert a.mode == "csr" and b.mode == "matrix-free"
    assert a.iterations == b.iterations
    assert abs(a.estimate - b.estimate) < 1e-12


def test_bracket_against_dense_eigenvalues():
    for k in range(1, 7):
        rho = max(abs(np.linalg.eigvals(matrix(k).to_dense().astype(float))))
        est = power_iteration(k, 1e-10)
        assert est.lower - 1e-9 <= rho <= est.upper + 1e-9


def test_parse_rational():
    assert parse_rational("9.35") == Fraction(187, 20)
    assert parse_rational("17/5") == Fraction(17, 5)
    assert parse_rational(7) == 7
    with pytest.raises(ValidationError):
        parse_rational(9.35)
    with pytest.raises(ValidationError):
        parse_rational("nine")


def test_certify_examples():
    cert = certify_lower_bound(2, "17/5", v=[5, 12])
    assert cert.verified and cert.c == Fraction(17, 5)
    cert = certify_lower_bound(2, 2, v=[1, 0])
    assert not cert.verified and cert.violation == 1
    for k in range(1, 7):
        assert certify_lower_bound(k, 1, v=[1] * matrix(k).n).verified


def test_certify_rational_vectors():
    assert certify_lower_bound(2, "17/5", v=[Fraction(1, 2), Fraction(6, 5)]).verified


def test_certify_errors():
    with pytest.raises(DimensionMismatch):
        certify_lower_bound(2, 1, v=[1, 1, 1])
    with pytest.raises(NonNegativityViolation):
        certify_lower_bound(2, 1, v=[1, -1])
    with pytest.raises(ZeroStart):
        certify_lower_bound(2, 1, v=[0, 1])


def test_certify_from_power_iteration():
    cert = certify_lower_bound(5, 7)
    assert cert.verified and cert.v[0] > 0 and min(cert.v) >= 0
    assert not certify_lower_bound(5, "7.002").verified


@pytest.mark.parametrize("k", range(2, 7))
def test_certification_soundness(k):
    est = power_iteration(k, 1e-10)
    c = Fraction(est.lower).limit_denominator(10**6) - Fraction(1, 10**6)
    cert = certify_lower_bound(k, c)
    assert cert.verified and cert.requested is None
    assert cert.c <= est.upper
    too_big = Fraction(est.upper) + Fraction(1, 1000)
    assert not certify_lower_bound(k, too_big).verified


def test_big_integer_fallback_agrees():
    op = Operator(4, matrix(4))
    w = [2**70 + i for i in range(op.n)]
    small = [i + 1 for i in range(op.n)]
    assert op.matvec_exact(w) == op._matvec_big(w)
    assert op.matvec_exact(small) == op._matvec_big(small)
    assert verify(op, Fraction(1), w) is None


def test_certificate_file_round_trip():
    cert = certify_lower_bound(3, "5.1")
    k, c, v = read_certificate_vector(cert.export_text())
    assert (k, c, v) == (3, Fraction(51, 10), cert.v)
    assert certify_lower_bound(3, c, v=v).verified


def test_certificate_vector_rounds_down():
    est = power_iteration(4, 1e-9)
    w = certificate_vector(est)
    assert all(x <= v * 2**40 for x, v in zip(w, est.vector))
    assert w[np.argmax(est.vector)] == 2**40


def test_lambda_table_small():
    rows = lambda_table(5, 1e-8)
    assert [r.k for r in rows] == [1, 2, 3, 4, 5]
    assert is_monotone(rows)
    for r, want in zip(rows, [1.0, 3.4142, 5.1120, 6.2262, 7.0014]):
        assert abs(r.estimate - want) <= 5e-4


def test_extrapolate_exact_models():
    fit = extrapolate([(k, 5.0) for k in range(1, 9)])
    assert fit.intercept == pytest.approx(5) and fit.slope == pytest.approx(0, abs=1e-12)
    assert max(abs(r) for r in fit.residuals) < 1e-12
    fit = extrapolate([(k, 3 - 2 / math.sqrt(k)) for k in range(1, 9)])
    assert fit.intercept == pytest.approx(3, abs=1e-12)
    assert fit.slope == pytest.approx(-2, abs=1e-12)


def test_extrapolate_needs_three_rows():
    with pytest.raises(InsufficientData):
        extrapolate([(1, 1.0), (2, 2.0), (3, 3.0)], k_min=2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 12))
def test_count_sum_bound(k, n):
    # every entry of A^n e_1 is bounded by (max row sum)^n, as the prime count assumes
    A = matrix(k).to_dense().astype(object)
    x = np.zeros(A.shape[0], dtype=object)
    x[0] = 1
    for _ in range(n):
        x = A.dot(x)
    assert max(x) <= int(A.sum(axis=1).max()) ** n
