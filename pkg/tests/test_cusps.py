import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.acceptance import primitive_pairs
from artifact.cusps import (
    GAMMA0, GAMMA1, CuspDivisor, CuspTable, c0_map, check_c0_equivariance, constant_term_adelic,
    constant_term_classical, cusp_key, d_bar, eisenstein_constant_terms, enumerate_cusps,
    hecke_on_cusps, ordinary_projector_cusps, orbit_count_oracle, projector_report, reduce_cusp,
)
from artifact.eisenstein import eta_product_cuspform
from artifact.exactmath import ZERO, divisors, euler_phi

from numeric_oracle import (
    constant_term_numeric, eisenstein_numeric, solve_constant, terms_needed,
)


def test_small_counts():
    assert len(enumerate_cusps(11, GAMMA0)) == 2
    assert len(enumerate_cusps(5)) == 4
    assert len(enumerate_cusps(1)) == 1


def test_counts_against_orbits():
    for N in range(1, 61):
        for group in (GAMMA1, GAMMA0):
            assert len(enumerate_cusps(N, group)) == orbit_count_oracle(N, group), (N, group)
        if N >= 5:
            assert 2 * len(enumerate_cusps(N)) == sum(euler_phi(d) * euler_phi(N // d) for d in divisors(N))
        assert len(enumerate_cusps(N, GAMMA0)) == sum(euler_phi(math.gcd(d, N // d)) for d in divisors(N))


@given(st.integers(1, 40), st.integers(-500, 500), st.integers(-500, 500), st.integers(-30, 30))
@settings(max_examples=200)
def test_key_is_invariant(N, a, c, t):
    if math.gcd(a, c) != 1:
        return
    # (1 t; 0 1) and -1 lie in Gamma_1(N); (1 0; N 1) as well
    k = cusp_key(a, c, N)
    assert cusp_key(a + t * c, c, N) == k
    assert cusp_key(-a, -c, N) == k
    assert cusp_key(a, c + t * N * a, N) == k
    assert reduce_cusp(a, c, N).key == k


def test_constant_terms_against_numeric_oracle():
    worst = 0.0
    for k in (2, 3, 4):
        for c1, c2 in primitive_pairs(10, k):
            N = c1.modulus * c2.modulus
            ct = eisenstein_constant_terms(c1, c2, k)
            count = max(max(terms_needed(s.witness, N) for s in ct), int(33 / (2 * math.pi * 0.7 / N)) + 10)
            a = eisenstein_numeric(c1, c2, k, count)
            a[0] = solve_constant(a, k, N)
            for s, v in ct.items():
                worst = max(worst, abs(constant_term_numeric(a, k, s.witness, N) - v.to_complex()))
    assert worst < 1e-8


def test_classical_convention():
    # primitive chi2 of prime conductor: the classical formula agrees with the adelic one
    for k in (2, 3):
        for c1, c2 in primitive_pairs(15, k):
            if c2.modulus not in (1, 3, 5) or math.gcd(c1.modulus, c2.modulus) != 1:
                continue
            for s in enumerate_cusps(c1.modulus * c2.modulus):
                assert constant_term_classical(c1, c2, k, s) == constant_term_adelic(c1, c2, k, s)


def test_cusp_forms_have_zero_constant_terms():
    f = eta_product_cuspform("f11", 20)
    assert all(v == ZERO for v in c0_map(f, 11).values())


def test_divisor_arithmetic():
    cusps = enumerate_cusps(15)
    D = CuspDivisor(15, 5, 2, {cusps[0]: 3, cusps[1]: 24})
    E = CuspDivisor(15, 5, 2, {cusps[1]: 1})
    assert (D + E).coeffs == {cusps[0]: 3}
    assert D.scale(25).is_zero()
    assert CuspDivisor.from_vector(15, 5, 2, cusps, D.vector(cusps)) == D


@pytest.mark.parametrize("N,p", [(6, 3), (15, 5), (20, 5), (18, 3)])
def test_projector(N, p):
    for direction in ("T", "T*"):
        r = projector_report(N, p, 4, direction)
        assert r["kills_support"] and r["rank_ok"] and r["idempotent"]


def test_projector_linear_and_hecke_stable():
    N, p, m = 15, 5, 3
    cusps = enumerate_cusps(N)
    rng = random.Random(1)
    D = CuspDivisor(N, p, m, {s: rng.randrange(125) for s in cusps})
    E = CuspDivisor(N, p, m, {s: rng.randrange(125) for s in cusps})
    eD, eE = ordinary_projector_cusps(D, p, m), ordinary_projector_cusps(E, p, m)
    assert ordinary_projector_cusps(D + E, p, m) == eD + eE
    assert ordinary_projector_cusps(eD, p, m) == eD
    for s in d_bar(N, p):
        assert ordinary_projector_cusps(CuspDivisor(N, p, m, {s: 1}), p, m).is_zero()
    # e commutes with T(p)
    assert hecke_on_cusps(eD, p) == ordinary_projector_cusps(hecke_on_cusps(D, p), p, m)


def test_signed_lookup():
    N = 7
    t = CuspTable(N)
    for s in t.cusps:
        i, e = t.find_signed(s.a, s.c)
        assert t.cusps[i] == s and e == 1
        # -a/-c is the same cusp with the opposite orientation unless -1 fixes it
        i, e = t.find_signed(-s.a, -s.c)
        h = math.gcd(s.c, N)
        fixed = (s.c % N, s.a % h) == ((-s.c) % N, (-s.a) % h)
        assert t.cusps[i] == s and e == (1 if fixed else -1)


@pytest.mark.parametrize("N,k,ell", [(5, 3, 2), (7, 2, 3), (12, 4, 5), (9, 3, 2)])
def test_c0_equivariance(N, k, ell):
    assert all(ok for _, ok in check_c0_equivariance(N, k, ell))
