"""Eisenstein q-expansions, L-values at negative integers and Hecke operators.

E_k(chi1, chi2) has C(m) = sum_{a | m} chi1(a) chi2(m/a) a^(k-1) and constant
term L(1-k, chi1 chi2^-1)/2 at infinity when chi2 is trivial.  Coefficients
are produced lazily, so a Hecke operator can reach indices far beyond the
window that is eventually compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from flint import fmpq, fmpq_poly, fmpz_poly

from .characters import DirChar
from .exactmath import ONE, ZERO, CycNum, divisors, factorint, lcm


# ---------------------------------------------------------------------------
# L-values

@dataclass(frozen=True)
class LValue:
    s: int
    char: DirChar
    value: CycNum
    removed: int = 1  # L-function with Euler factors at primes dividing this removed


@lru_cache(maxsize=None)
def _bernoulli_poly(k):
    return fmpq_poly.bernoulli_poly(k)


def generalized_bernoulli(chi, k):
    """B_{k,chi} = f^(k-1) sum_{a=1}^f chi(a) B_k(a/f), f the conductor."""
    chi = chi.primitive()
    f = chi.modulus
    if f == 1:
        # B_k(1) = B_k except B_1(1) = +1/2
        b = fmpq.bernoulli(k)
        return CycNum.rational(Fraction(1, 2) if k == 1 else Fraction(int(b.p), int(b.q)))
    B = _bernoulli_poly(k)
    L = chi.order
    dense = [Fraction(0)] * L
    for a in range(1, f + 1):
        t = chi.exponent(a % f)
        if t is None:
            continue
        val = B(fmpq(a, f))
        dense[t] += Fraction(int(val.p), int(val.q))
    return CycNum.from_dense(L, dense) * Fraction(f) ** (k - 1)


def bernoulli_L(chi, k, removed=1):
    """L(1-k, chi) = -B_{k,chi}/k, optionally with Euler factors at p | removed dropped.

    Removing the factor at p multiplies by (1 - chi(p) p^(k-1)), chi primitive.
    """
    if k < 1:
        raise ValueError("L(1-k, chi) needs k >= 1 (k = 0 is the pole of zeta)")
    chi = chi.primitive()
    val = -generalized_bernoulli(chi, k) / k
    for p in factorint(removed):
        val = val * (1 - chi(p) * Fraction(p) ** (k - 1))
    return LValue(1 - k, chi, val, removed)


def partial_L(chi, k, N):
    """L^N(1-k, chi): Euler factors at primes dividing N removed."""
    return bernoulli_L(chi, k, N).value


# ---------------------------------------------------------------------------
# q-expansions

class QExpansion:
    """Truncated q-expansion sum_{n=1}^{bound} C(n) q^n plus constant terms.

    ``coeff`` is either a dict n -> CycNum or a function; function values are
    cached.  ``nebentypus`` is a DirChar modulo ``level`` (zero on primes
    dividing the level), needed by the Hecke operators.
    """

    def __init__(self, weight, level, bound, coeff, nebentypus=None, chars=None,
                 constant_terms=None, label=""):
        self.weight = weight
        self.level = level
        self.bound = bound
        self.nebentypus = nebentypus
        self.chars = chars
        self.constant_terms = dict(constant_terms or {})
        self.label = label
        if callable(coeff):
            self._fn = coeff
            self._cache = {}
        else:
            self._fn = None
            self._cache = {n: CycNum.coerce(c) for n, c in coeff.items()}

    def coeff(self, n):
        if n < 1 or n > self.bound:
            raise IndexError(f"index {n} outside 1..{self.bound}")
        c = self._cache.get(n)
        if c is None:
            c = self._fn(n) if self._fn else ZERO
            self._cache[n] = c
        return c

    __getitem__ = coeff

    @property
    def coeffs(self):
        return {n: self.coeff(n) for n in range(1, self.bound + 1)}

    def truncate(self, bound):
        bound = min(bound, self.bound)
        return QExpansion(self.weight, self.level, bound, self.coeff, self.nebentypus,
                          self.chars, self.constant_terms, self.label)

    def scale(self, c):
        c = CycNum.coerce(c)
        return QExpansion(self.weight, self.level, self.bound, lambda n: c * self.coeff(n),
                          self.nebentypus, self.chars,
                          {k: c * v for k, v in self.constant_terms.items()}, self.label)

    def __sub__(self, other):
        bound = min(self.bound, other.bound)
        return QExpansion(self.weight, self.level, bound, lambda n: self.coeff(n) - other.coeff(n),
                          self.nebentypus, None)

    def equals(self, other, bound=None):
        """Coefficientwise equality on the common window (and up to ``bound``)."""
        B = min(self.bound, other.bound, bound or self.bound)
        return all(self.coeff(n) == other.coeff(n) for n in range(1, B + 1))

    def to_json(self):
        return {
            "weight": self.weight,
            "level": self.level,
            "chars": [c.to_json() for c in self.chars] if self.chars else None,
            "bound": self.bound,
            "coeffs": [[n, c.to_json()] for n, c in self.coeffs.items()],
            "constant_terms": [[str(k), CycNum.coerce(v).to_json()] for k, v in self.constant_terms.items()],
        }

    def __repr__(self):
        head = ", ".join(str(self.coeff(n)) for n in range(1, min(self.bound, 5) + 1))
        return f"QExpansion({self.label or 'f'}, k={self.weight}, N={self.level}, B={self.bound}: {head}, ...)"


def check_parity(chi1, chi2, k):
    if chi1.parity * chi2.parity != (-1) ** k:
        raise ValueError(f"parity: chi1(-1) chi2(-1) must equal (-1)^{k}")


def _divisor_sum(chi1, chi2, k, skip=None):
    """n -> sum_{a | n} chi1(a) chi2(n/a) a^(k-1), a prime to ``skip`` if given."""
    c1, c2 = chi1.primitive(), chi2.primitive()
    L = lcm(c1.order, c2.order)
    s1, s2 = L // c1.order, L // c2.order
    m1, m2 = c1.modulus, c2.modulus
    t1, t2 = c1.table, c2.table

    def fn(n):
        dense = [0] * L
        hit = False
        for a in divisors(n):
            if skip and a % skip == 0:
                continue
            x, y = t1[a % m1], t2[(n // a) % m2]
            if x < 0 or y < 0:
                continue
            dense[(x * s1 + y * s2) % L] += a ** (k - 1)
            hit = True
        return CycNum.from_dense(L, dense) if hit else ZERO

    return fn


def eisenstein_qexp(chi1, chi2, k, bound, allow_trivial=False):
    """E_k(chi1, chi2) truncated at ``bound``; level cond(chi1) cond(chi2).

    chi1 must be nontrivial unless ``allow_trivial`` (used for the level one
    series with k >= 4, where chi1 = chi2 = 1 is holomorphic).
    """
    chi1, chi2 = chi1.primitive(), chi2.primitive()
    if k < 2:
        raise ValueError("weight must be at least 2")
    if chi1.is_trivial() and not (allow_trivial and not (k == 2 and chi2.is_trivial())):
        raise ValueError("chi1 must be nontrivial")
    check_parity(chi1, chi2, k)
    N = chi1.modulus * chi2.modulus
    neb = (chi1 * chi2).induce(N) if N > 1 else DirChar.trivial(1)
    const = {}
    if chi2.modulus == 1:
        const["oo"] = bernoulli_L(chi1 * chi2.inverse(), k).value / 2
    else:
        const["oo"] = ZERO
    return QExpansion(k, N, bound, _divisor_sum(chi1, chi2, k), neb, (chi1, chi2), const,
                      label=f"E{k}({chi1.label()},{chi2.label()})")


def eisenstein_qexp_stabilized(chi1, chi2, k, bound, p):
    """The p-stabilized series: inner divisor sum over a prime to p.

    Equals E(z) - chi1(p) p^(k-1) E(pz); its level is lcm(N, p).
    """
    chi1, chi2 = chi1.primitive(), chi2.primitive()
    check_parity(chi1, chi2, k)
    N = chi1.modulus * chi2.modulus
    M = lcm(N, p)
    neb = (chi1 * chi2).induce(M)
    const = {"oo": ZERO}
    if chi2.modulus == 1:
        const["oo"] = bernoulli_L(chi1, k, p).value / 2
    return QExpansion(k, M, bound, _divisor_sum(chi1, chi2, k, skip=p), neb, (chi1, chi2), const,
                      label=f"E{k}^({p})({chi1.label()},{chi2.label()})")


def hecke_eigenvalue(chi1, chi2, k, ell):
    """chi2(ell) + chi1(ell) ell^(k-1) for primitive chi1, chi2."""
    return chi2.primitive()(ell) + chi1.primitive()(ell) * Fraction(ell) ** (k - 1)


# ---------------------------------------------------------------------------
# Hecke operators

def _neb(f):
    if f.nebentypus is None:
        raise ValueError("a nebentypus is needed for Hecke operators")
    return f.nebentypus


def hecke_T(f, a):
    """T(a) f: C(m, T(a) f) = sum_{b | gcd(m, a)} chi(b) b^(k-1) C(m a / b^2, f).

    chi is the nebentypus modulo the level, so T(p) for p | level is U(p).
    The output bound is floor(bound / a).
    """
    if a == 1:
        return f
    chi = _neb(f)
    B = f.bound // a
    if B < 1:
        raise ValueError("output truncation would be empty")
    k = f.weight
    weights = [(b, chi(b) * Fraction(b) ** (k - 1)) for b in divisors(a)[1:] if chi(b)]

    def fn(m):
        out = f.coeff(m * a)
        for b, w in weights:
            if m % b == 0:
                out = out + w * f.coeff(m * a // (b * b))
        return out

    const = {}
    if "oo" in f.constant_terms:
        # C(0, T(a) f) = sum_{b | a} chi(b) b^(k-1) C(0, f)
        c0 = CycNum.coerce(f.constant_terms["oo"])
        const["oo"] = sum((chi(b) * Fraction(b) ** (k - 1) for b in divisors(a)), ZERO) * c0
    return QExpansion(k, f.level, B, fn, chi, f.chars, const, label=f"T({a}){f.label}")


def diamond(f, q):
    """<q> f = chi(q) f for a form with nebentypus chi; zero when q | level."""
    return f.scale(_neb(f)(q))


def hecke_S(f, q):
    """S(q) f = chi(q) q^(k-2) f, so that T(q)^2 - T(q^2) = q S(q).

    Zero when q divides the level.
    """
    chi = _neb(f)
    return f.scale(chi(q) * Fraction(q) ** (f.weight - 2))


# ---------------------------------------------------------------------------
# eta products

def _euler_product(bound, step=1):
    """prod_{n >= 1} (1 - q^(step n)) below q^bound, from the pentagonal number theorem."""
    c = [0] * bound
    j = 0
    while j * (3 * j - 1) // 2 * step < bound:
        for t in {j, -j}:
            g = t * (3 * t - 1) // 2 * step
            if g < bound:
                c[g] = -1 if t % 2 else 1
        j += 1
    return fmpz_poly(c)


def eta_product_cuspform(name, bound):
    """Integer q-expansions: 'delta' = q prod(1-q^n)^24, 'f11' = q prod((1-q^n)(1-q^11n))^2."""
    n = bound  # need q^0 .. q^(bound-1) of the product
    if name == "delta":
        poly = _euler_product(n).pow_trunc(24, n)
        level, weight = 1, 24 // 2
    elif name == "f11":
        poly = (_euler_product(n) * _euler_product(n, 11)).pow_trunc(2, n)
        level, weight = 11, 2
    else:
        raise ValueError("eta product must be 'delta' or 'f11'")
    coeffs = poly.coeffs() + [0] * n
    data = {m: CycNum.rational(int(coeffs[m - 1])) for m in range(1, bound + 1)}
    neb = DirChar.trivial(level)
    return QExpansion(weight, level, bound, data, neb, None, {"oo": ZERO, "*": ZERO}, label=name)


# ---------------------------------------------------------------------------
# congruences

def _divisible(x, modulus):
    """(integral at the primes of modulus, x = 0 mod modulus)."""
    primes = list(factorint(modulus))
    if any(x.denominator() % p == 0 for p in primes):
        return False, False
    y = x / modulus
    return True, all(y.denominator() % p for p in primes)


def check_congruence(f, g, modulus, B=None, indices=None):
    """Indices n <= B with C(n, f) != C(n, g) mod ``modulus``.

    Returns {"mismatches": [...], "nonintegral": [...], "window": B}.
    """
    B = min(f.bound, g.bound, B or f.bound)
    idx = indices if indices is not None else range(1, B + 1)
    bad, nonint = [], []
    for n in idx:
        if n > B:
            continue
        ok, zero = _divisible(f.coeff(n) - g.coeff(n), modulus)
        if not ok:
            nonint.append(n)
        elif not zero:
            bad.append(n)
    return {"mismatches": bad, "nonintegral": nonint, "window": B, "modulus": modulus}
