import math

from hypothesis import given, strategies as st

from artifact.characters import (
    DirChar, char_mul, enumerate_chars, from_conrey, primitive_chars, teichmuller_char,
)
from artifact.exactmath import CycNum, divisors, euler_phi, moebius


def test_primitive_counts():
    for N in range(1, 101):
        want = sum(moebius(N // d) * euler_phi(d) for d in divisors(N))
        assert len(primitive_chars(N)) == want


def test_orthogonality():
    for N in (7, 8, 12, 15):
        chars = enumerate_chars(N)
        assert len(chars) == euler_phi(N)
        for a in range(N):
            s = sum((chi(a) for chi in chars), CycNum.rational(0))
            assert s == CycNum.rational(euler_phi(N) if a % N == 1 % N else 0)


def test_conrey():
    # index 3 is the primitive root mod 7, so chi(3) = e(1/6)
    chi = from_conrey(7, 3)
    assert chi(3) == CycNum.zeta(6)
    assert chi.order == 6 and chi.parity == -1
    assert from_conrey(20, 1).is_trivial()


@given(st.sampled_from([5, 9, 11, 25, 27]), st.integers(1, 1000), st.integers(1, 1000))
def test_conrey_symmetry(q, m, n):
    if math.gcd(m * n, q) != 1:
        return
    assert from_conrey(q, m)(n) == from_conrey(q, n)(m)


def test_char_mul_primitive():
    w = teichmuller_char(5)
    assert char_mul(w, w.inverse()).modulus == 1
    for a in primitive_chars(4):
        for b in primitive_chars(5):
            c = char_mul(a, b)
            assert c.is_primitive() and c.conductor == 20
            assert c.parity == a.parity * b.parity
            for x in range(1, 40, 3):
                if math.gcd(x, 20) == 1:
                    assert c(x) == a(x) * b(x)


def test_induce_and_primitive():
    chi = primitive_chars(3)[0]
    big = chi.induce(15)
    assert big(5) == CycNum.rational(0)
    assert big.primitive().modulus == 3
    assert DirChar.trivial(6).conductor == 1
