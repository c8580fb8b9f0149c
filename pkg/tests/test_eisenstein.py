from fractions import Fraction
from math import comb

from hypothesis import given, settings, strategies as st

from artifact.acceptance import primitive_pairs
from artifact.characters import DirChar, primitive_chars
from artifact.eisenstein import (
    eisenstein_qexp, eisenstein_qexp_stabilized, eta_product_cuspform, generalized_bernoulli,
    hecke_eigenvalue, hecke_T,
)
from artifact.exactmath import CycNum, divisors


def _naive_eta(bound, factors):
    # prod over (step, power) of (1 - q^(step n))^power, times q
    c = [1] + [0] * bound
    for step, power in factors:
        for _ in range(power):
            for n in range(step, bound + 1, step):
                for i in range(bound, n - 1, -1):
                    c[i] -= c[i - n]
    return [0] + c[:bound]


def test_eta_products():
    B = 60
    delta = eta_product_cuspform("delta", B)
    want = _naive_eta(B, [(1, 24)])
    assert all(delta.coeff(n) == CycNum.rational(want[n]) for n in range(1, B + 1))
    f = eta_product_cuspform("f11", B)
    want = _naive_eta(B, [(1, 2), (11, 2)])
    assert all(f.coeff(n) == CycNum.rational(want[n]) for n in range(1, B + 1))
    assert [f.coeff(n).to_rational() for n in (2, 3, 5, 7)] == [-2, -1, 1, -2]


def _bernoulli_poly_at(k, x):
    B = [Fraction(1)]
    for n in range(1, k + 1):
        B.append(-sum(comb(n + 1, j) * B[j] for j in range(n)) / (n + 1))
    return sum(comb(k, j) * B[j] * x ** (k - j) for j in range(k + 1))


def test_generalized_bernoulli():
    for f in (3, 4, 5, 7, 8):
        for chi in primitive_chars(f):
            for k in range(1, 5):
                if chi.parity != (-1) ** k:
                    continue
                direct = sum(chi(a).to_complex() * float(_bernoulli_poly_at(k, Fraction(a, f)))
                             for a in range(1, f + 1)) * f ** (k - 1)
                assert abs(generalized_bernoulli(chi, k).to_complex() - direct) < 1e-9


def test_level_one_product():
    # (1 + 240 sum sigma_3 q^n)^2 = 1 + 480 sum sigma_7 q^n
    one = DirChar.trivial(1)
    B = 30
    e4 = eisenstein_qexp(one, one, 4, B, allow_trivial=True)
    assert e4.constant_terms["oo"] == CycNum.rational(Fraction(1, 240))
    a = [1] + [240 * e4.coeff(n).to_rational() for n in range(1, B + 1)]
    sq = [sum(a[i] * a[n - i] for i in range(n + 1)) for n in range(B + 1)]
    assert sq == [1] + [480 * sum(d ** 7 for d in divisors(n)) for n in range(1, B + 1)]


pairs = list(primitive_pairs(12, k=None))


@given(st.sampled_from(pairs), st.sampled_from([2, 3, 4, 5]), st.sampled_from([2, 3, 5, 7, 11]))
@settings(max_examples=40, deadline=None)
def test_hecke_eigen(pair, k, ell):
    c1, c2 = pair
    if c1.parity * c2.parity != (-1) ** k:
        return
    f = eisenstein_qexp(c1, c2, k, 30 * ell)
    g = hecke_T(f, ell)
    lam = hecke_eigenvalue(c1, c2, k, ell)
    assert all(g.coeff(n) == lam * f.coeff(n) for n in range(1, 31))


def test_stabilized():
    chi = primitive_chars(4)[0]
    one = DirChar.trivial(1)
    E = eisenstein_qexp(chi, one, 3, 90)
    Ep = eisenstein_qexp_stabilized(chi, one, 3, 90, 3)
    for n in range(1, 91):
        want = E.coeff(n) - (chi(3) * 9 * E.coeff(n // 3) if n % 3 == 0 else CycNum.rational(0))
        assert Ep.coeff(n) == want
    # U(3) eigenvalue of the stabilization is chi2(3) = 1
    U = hecke_T(Ep, 3)
    assert all(U.coeff(n) == Ep.coeff(n) for n in range(1, 31))
