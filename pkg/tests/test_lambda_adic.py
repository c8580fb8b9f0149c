from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.characters import DirChar, primitive_chars, teichmuller_char
from artifact.exactmath import teichmuller
from artifact.lambda_adic import (
    check_specialization, eisenstein_A, fiber_valuation, kl_residual, kubota_leopoldt,
    lambda_eisenstein, lp_value, weight_exponent,
)

ONE_CHAR = DirChar.trivial(1)


def test_weight_exponent_frozen():
    # brute force over 6^s mod 5^4 gives s = 45 for a = 7
    w = weight_exponent(7, 5, 4)
    assert w.s == 45 and pow(w.teich, 4, 625) == 1


@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 10 ** 6), st.integers(2, 6))
@settings(max_examples=100)
def test_weight_exponent_property(p, a, prec):
    if a % p == 0:
        return
    M = p ** prec
    w = weight_exponent(a, p, prec)
    assert w.teich == teichmuller(a, p, prec)
    assert pow(1 + p, w.s, M) * w.teich % M == a % M


def test_lp_value():
    # (1 - 5)(-B_2 / 2) = 1/3
    assert lp_value(teichmuller_char(5, 2), 5, 2) == Fraction(1, 3)


@given(st.integers(1, 12), st.integers(0, 1))
@settings(max_examples=20, deadline=None)
def test_kummer_congruence(i, j):
    # k = k' mod (p-1) p^j  ->  L_p(1-k) = L_p(1-k') mod p^(j+1)
    p, chi = 5, teichmuller_char(5, 2)
    k = 2 + (p - 1) * i
    k2 = k + (p - 1) * p ** j
    d = lp_value(chi, p, k2) - lp_value(chi, p, k)
    assert (d.numerator if isinstance(d, Fraction) else d.to_rational().numerator) % p ** (j + 1) == 0


def test_kl_residual_detects_corruption():
    chi = teichmuller_char(7, 2)
    G = kubota_leopoldt(chi, 7, 3, 3)
    for k in (5, 14, 21):
        assert not any(kl_residual(G, k))
    ring = G.series.ring
    G.series.coeffs[1] = ring.add(G.series.coeffs[1], ring.one)
    assert any(any(kl_residual(G, k)) for k in (14, 20, 26))


def test_kl_real_quadratic():
    chi = next(c for c in primitive_chars(12) if c.parity == 1)
    G = kubota_leopoldt(chi, 5, 4, 4)
    assert not any(kl_residual(G, 3)) and not any(kl_residual(G, 24))


def test_coefficients_multiplicative():
    chi1 = primitive_chars(3)[0]
    chi2 = primitive_chars(4)[0]
    F = lambda_eisenstein(chi1, chi2, 5, 3, 4, 60)
    for m, n in [(2, 3), (3, 7), (4, 11), (6, 7), (5, 12)]:
        assert F.coeff(m * n) == F.coeff(m) * F.coeff(n)


@pytest.mark.parametrize("k", [2, 3, 6])
def test_specialization(k):
    chi1 = next(c for c in primitive_chars(12) if c.parity == 1)
    bad, const_ok = check_specialization(chi1, ONE_CHAR, 5, 4, 4, 60, k)
    assert not bad and const_ok


def test_wild_specialization():
    chi1 = next(c for c in primitive_chars(12) if c.parity == 1)
    bad, _ = check_specialization(chi1, ONE_CHAR, 5, 2, 8, 40, 2, zeta_order=5)
    assert not bad


@pytest.mark.parametrize("N", [11, 19, 29, 31, 41])
def test_prime_level_index(N):
    # 5-part of numerator((N - 1) / 12)
    mazur = Fraction(N - 1, 12).numerator
    want = 1 if mazur % 5 == 0 else 0
    A = eisenstein_A(ONE_CHAR, ONE_CHAR, 5, 3, 3, level=N, form="constant_term")
    assert fiber_valuation(A, 2) == want


def test_displayed_form_at_eleven():
    A = eisenstein_A(ONE_CHAR, ONE_CHAR, 5, 3, 3, level=11)
    assert fiber_valuation(A, 2) == 1
