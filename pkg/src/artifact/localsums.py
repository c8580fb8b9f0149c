"""Finite-place character sums, epsilon factors and intertwining constants.

Conventions
-----------
* Local fields are Q_p with uniformizer p and Haar measure vol(Z_p) = 1.
* The additive character is psi(x) = exp(-2 pi i {x}_p) at every prime, so
  the conductor of psi is Z_p.  With this choice the local Gauss sum
  tau(theta) = sum_{x mod p^e} theta(x) psi(x / p^e) equals theta(-1) times
  the classical sum with exp(+2 pi i x / p^e).
* A local quasi-character theta of Q_p^x is a unit character (a primitive
  Dirichlet character mod p^e) together with its value at p.
* Symbolic dependence on s is carried in the variable Y = p^(-2s), so
  s = (1-k)/2 is Y = p^(k-1).  Every exponent that occurs is integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .characters import DirChar
from .exactmath import ONE, ZERO, CycNum, factorint, lcm


# ---------------------------------------------------------------------------
# p-adic bookkeeping

def split_unit(x, p):
    """x = p^v * u with u a p-adic unit; returns (v, u) with u a Fraction."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no valuation")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


def residue(u, p, k):
    """Image of a p-integral rational in Z/p^k."""
    u = Fraction(u)
    q = p ** k
    if u.denominator % p == 0:
        raise ValueError(f"{u} is not {p}-integral")
    return u.numerator * pow(u.denominator, -1, q) % q if q > 1 else 0


def padic_val(x, p):
    x = Fraction(x)
    if x == 0:
        return math.inf
    return split_unit(x, p)[0]


# ---------------------------------------------------------------------------
# local characters

class LocalChar:
    """Quasi-character of Q_p^x: a unit character mod p^e plus the value at p."""

    __slots__ = ("p", "unit", "at_p")

    def __init__(self, p, unit=None, at_p=ONE):
        unit = unit if unit is not None else DirChar.trivial(1)
        if unit.modulus > 1:
            f = factorint(unit.modulus)
            if list(f) != [p]:
                raise ValueError("unit character must have p-power modulus")
            unit = unit.primitive()
        self.p = p
        self.unit = unit
        self.at_p = CycNum.coerce(at_p)

    @property
    def char(self):
        return self.unit

    @property
    def e(self):
        c = self.unit.conductor
        return 0 if c == 1 else factorint(c)[self.p]

    def is_ramified(self):
        return self.e > 0

    @classmethod
    def from_dirichlet(cls, chi, p):
        """Component at p of the idele class character attached to chi.

        On Z_p^x it is the inverse of the p-part of chi; at p it is the value
        of the prime-to-p part of chi at p (both forced by triviality on Q^x).
        """
        chi = chi.primitive()
        comps = chi.local_components()
        unit = comps[p].inverse() if p in comps else DirChar.trivial(1)
        at_p = ONE
        for ell, comp in comps.items():
            if ell != p:
                at_p = at_p * comp(p)
        return cls(p, unit, at_p)

    def unit_value(self, u):
        """theta on a p-adic unit given as a rational."""
        if self.unit.modulus == 1:
            return ONE
        return self.unit(residue(u, self.p, self.e))

    def __call__(self, x):
        x = Fraction(x)
        if x == 0:
            return ZERO
        v, u = split_unit(x, self.p)
        val = self.unit_value(u)
        if v:
            val = val * self.at_p ** v
        return val

    def inverse(self):
        return LocalChar(self.p, self.unit.inverse(), self.at_p.inverse())

    def __mul__(self, other):
        if other.p != self.p:
            raise ValueError("residue characteristics differ")
        return LocalChar(self.p, self.unit * other.unit, self.at_p * other.at_p)

    def __eq__(self, other):
        return (
            isinstance(other, LocalChar)
            and self.p == other.p
            and self.unit.primitive() == other.unit.primitive()
            and self.at_p == other.at_p
        )

    def __hash__(self):
        return hash((self.p, self.unit.primitive()))

    def __repr__(self):
        return f"LocalChar(p={self.p}, e={self.e}, unit={self.unit!r}, at_p={self.at_p!r})"


def local_chars(p, e, at_p=ONE):
    """All primitive unit characters of conductor exactly p^e, as LocalChars."""
    from .characters import enumerate_chars

    if e == 0:
        return [LocalChar(p, None, at_p)]
    return [LocalChar(p, c, at_p) for c in enumerate_chars(p ** e, primitive_only=True)]


# ---------------------------------------------------------------------------
# Gauss and Jacobi sums

def _group_ring_sum(terms, L):
    """sum of zeta_L^j over (j, coefficient) pairs, as a CycNum."""
    dense = [0] * L
    for j, c in terms:
        dense[j % L] += c
    return CycNum.from_dense(L, dense)


@lru_cache(maxsize=None)
def _gauss_sum_unit(unit, sign):
    q = unit.modulus
    L = lcm(unit.order, q)
    a, b = L // unit.order, L // q
    terms = []
    for x in range(q):
        t = unit.exponent(x)
        if t is not None:
            terms.append((t * a + sign * x * b, 1))
    return _group_ring_sum(terms, L)


def gauss_sum(theta):
    """tau(theta) = sum over (Z/p^e)^x of theta(x) psi(x/p^e), psi = exp(-2 pi i .)."""
    if not theta.is_ramified():
        raise ValueError("Gauss sum needs a ramified character")
    return _gauss_sum_unit(theta.unit, -1)


def dirichlet_gauss_sum(chi, sign=1):
    """sum_{a mod f} chi(a) exp(sign * 2 pi i a / f) for a Dirichlet character.

    ``sign=+1`` is the classical sum; ``sign=-1`` matches :func:`gauss_sum`.
    The trivial character of conductor 1 has sum 1.
    """
    chi = chi.primitive()
    if chi.modulus == 1:
        return ONE
    return _gauss_sum_unit(chi, sign)


def jacobi_sum(theta1, theta2, a, k):
    """J_a(theta1, theta2, p^k) = sum_{x in (Z/p^k)^x} theta1(x) theta2(a - x).

    Both characters are read on (Z/p^k) and extended by zero off the units.
    """
    if theta1.p != theta2.p:
        raise ValueError("residue characteristics differ")
    p = theta1.p
    if k < max(theta1.e, theta2.e) or k < 1:
        raise ValueError("k must be at least both conductor exponents")
    q = p ** k
    a = residue(a, p, k)
    u1, u2 = theta1.unit, theta2.unit
    L = lcm(u1.order, u2.order)
    s1, s2 = L // u1.order, L // u2.order
    m1, m2 = u1.modulus, u2.modulus
    counts = {}
    for x in range(q):
        if x % p == 0:
            continue
        y = (a - x) % q
        if y % p == 0:
            continue
        t = u1.table[x % m1] * s1 + u2.table[y % m2] * s2
        counts[t % L] = counts.get(t % L, 0) + 1
    return _group_ring_sum(counts.items(), L)


def unit_sum(fn, p, k):
    """sum over x in (Z/p^k)^x of fn(x) (fn returns CycNum)."""
    out = ZERO
    for x in range(p ** k):
        if x % p:
            out = out + fn(x)
    return out


# ---------------------------------------------------------------------------
# epsilon factors

@dataclass(frozen=True)
class LaurentMonomial:
    """scalar * q^qpower * (q^-s)^exponent."""

    scalar: CycNum
    exponent: int
    qpower: Fraction
    q: int

    def __mul__(self, other):
        if self.q != other.q:
            raise ValueError("different q")
        return LaurentMonomial(
            self.scalar * other.scalar,
            self.exponent + other.exponent,
            self.qpower + other.qpower,
            self.q,
        )

    def inverse(self):
        return LaurentMonomial(self.scalar.inverse(), -self.exponent, -self.qpower, self.q)

    def at(self, s):
        """Value at a rational s; the total power of q must be integral."""
        power = Fraction(self.qpower) - Fraction(s) * self.exponent
        if power.denominator != 1:
            raise ValueError("half-integral power of q at this s")
        return self.scalar * Fraction(self.q) ** int(power)


def epsilon_factor(theta, k=None):
    """epsilon(s, theta, psi) as a monomial in q^-s, and its value at s = 2-k.

    For theta of conductor p^e this is p^(-s e) theta(p)^e tau(theta^-1);
    unramified characters give the unit monomial.
    """
    p = theta.p
    if not theta.is_ramified():
        mono = LaurentMonomial(ONE, 0, Fraction(0), p)
    else:
        e = theta.e
        scalar = theta.at_p ** e * gauss_sum(theta.inverse())
        mono = LaurentMonomial(scalar, e, Fraction(0), p)
    if k is None:
        return mono, None
    return mono, mono.at(2 - k)


# ---------------------------------------------------------------------------
# rational functions of Y = p^(-2s)

class RationalY:
    """num(Y) / den(Y) with Laurent-polynomial numerator and denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num = {e: c for e, c in num.items() if c}
        self.den = {e: c for e, c in (den or {0: ONE}).items() if c}

    @classmethod
    def monomial(cls, c, e=0):
        return cls({e: CycNum.coerce(c)})

    def __add__(self, other):
        num = _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den))
        return RationalY(num, _poly_mul(self.den, other.den))

    def __mul__(self, other):
        if not isinstance(other, RationalY):
            other = RationalY.monomial(other)
        return RationalY(_poly_mul(self.num, other.num), _poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __call__(self, Y):
        n = _poly_eval(self.num, Y)
        d = _poly_eval(self.den, Y)
        if not d:
            raise ZeroDivisionError("pole at this Y")
        return n / d

    def at_weight(self, p, k):
        return self(Fraction(p) ** (k - 1))

    def __repr__(self):
        return f"RationalY({self.num} / {self.den})"


def _poly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out[e] + c if e in out else c
    return {e: c for e, c in out.items() if c}


def _poly_mul(a, b):
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            out[e] = out[e] + c1 * c2 if e in out else c1 * c2
    return {e: c for e, c in out.items() if c}


def _poly_eval(a, Y):
    out = ZERO
    Y = Fraction(Y)
    for e, c in a.items():
        out = out + c * (Y ** e)
    return out


# ---------------------------------------------------------------------------
# intertwining constants: closed forms

CASE_TAGS = (
    "unram-unram",
    "ram-unram",
    "unram-ram",
    "ram-ram:e1>e2",
    "ram-ram:e1<e2",
    "ram-ram:e1=e2,t=e1",
    "ram-ram:e1=e2,1<=t<e1",
    "ram-ram:e1=e2,t=0",
)


@dataclass
class IntertwiningConstant:
    value: CycNum
    symbolic: RationalY
    case: str
    i: int
    k: int
    form: str = "corrected"
    notes: list = field(default_factory=list)


def case_tag(chi1, chi2):
    e1, e2 = chi1.e, chi2.e
    if e1 == 0 and e2 == 0:
        return "unram-unram"
    if e2 == 0:
        return "ram-unram"
    if e1 == 0:
        return "unram-ram"
    if e1 > e2:
        return "ram-ram:e1>e2"
    if e1 < e2:
        return "ram-ram:e1<e2"
    t = (chi1.inverse() * chi2).e
    if t == e1:
        return "ram-ram:e1=e2,t=e1"
    if t == 0:
        return "ram-ram:e1=e2,t=0"
    return "ram-ram:e1=e2,1<=t<e1"


def _mixed_sum(outer, inner, shift, e):
    """sum_{x in (Z/p^e)^x} outer(x) * inner(1 - p^shift x)."""
    p = outer.p
    return unit_sum(lambda x: outer(x) * inner(1 - p ** shift * x), p, e)


def intertwining_symbolic(chi1, chi2, i, form="corrected"):
    """M_{s,i} = (M f)(gamma_i) as a rational function of Y = p^(-2s).

    ``i`` ranges over 0 <= i <= e1 + e2; i = e1 + e2 means the identity.
    ``form="printed"`` uses the closed forms as usually stated.  They agree
    with :func:`intertwining_oracle` except when e1 = e2 and chi1^-1 chi2 is
    unramified: there the coefficient of Y^k also carries
    (chi1 chi2^-1(p))^k, which ``form="corrected"`` (the default) includes.
    """
    if chi1.p != chi2.p:
        raise ValueError("residue characteristics differ")
    p = chi1.p
    e1, e2 = chi1.e, chi2.e
    N = e1 + e2
    if not 0 <= i <= N:
        raise ValueError(f"i={i} outside 0..{N}")
    tag = case_tag(chi1, chi2)
    zero = RationalY({})
    inv1 = chi1.inverse()
    q = Fraction(p)
    if tag == "unram-unram":
        rho = chi1(p) * chi2(p).inverse()
        return tag, RationalY({0: ONE, 1: -rho / q}, {0: ONE, 1: -rho})
    if i == N:
        # the identity coset
        return tag, (RationalY.monomial(1) if tag == "ram-unram" else zero)
    if tag == "ram-unram":
        return tag, zero
    if tag == "unram-ram":
        if i > 0:
            return tag, zero
        c = inv1(p ** e2) * chi2(-1) / q ** e2
        return tag, RationalY.monomial(c)
    if i != e1:
        return tag, zero
    if tag == "ram-ram:e1>e2":
        s = _mixed_sum(chi2, inv1, e1 - e2, e2)
        c = chi2(Fraction(-1, p ** e2)) / q ** e2 * s
        return tag, RationalY.monomial(c, e2)
    if tag == "ram-ram:e1<e2":
        s = _mixed_sum(inv1, chi2, e2 - e1, e1)
        c = inv1(p ** (e2 - e1)) * chi2(-Fraction(1, p ** e1)) / q ** e2 * s
        return tag, RationalY.monomial(c, e1)
    e = e1
    t = (inv1 * chi2).e
    if tag == "ram-ram:e1=e2,t=e1":
        c = chi2(Fraction(-1, p ** e)) / q ** e * jacobi_sum(chi2, inv1, 1, e)
        return tag, RationalY.monomial(c, e)
    if tag == "ram-ram:e1=e2,1<=t<e1":
        c = (
            inv1(Fraction(p) ** (t - e))
            * chi2(-Fraction(p) ** (t - 2 * e))
            / q ** e
            * jacobi_sum(chi2, inv1, p ** (e - t), e)
        )
        return tag, RationalY.monomial(c, 2 * e - t)
    # t = 0
    head = inv1(p ** e) * chi2(-1) / q ** e * jacobi_sum(chi2, inv1, p ** (e - 1), e)
    tail_c = inv1(p ** e) * chi2(-1) / q ** e * jacobi_sum(inv1, chi2, 0, e)
    if form == "printed":
        ratio = ONE
    else:
        ratio = chi1(p) * chi2(p).inverse()
        tail_c = tail_c * ratio ** (2 * e)
        head = head * ratio ** (2 * e - 1)
    # sum_{k >= 2e} tail_c * ratio^(k-2e) Y^k = tail_c Y^2e / (1 - ratio Y)
    tail = RationalY({2 * e: tail_c}, {0: ONE, 1: -ratio})
    return tag, RationalY.monomial(head, 2 * e - 1) + tail


def intertwining_constant(chi1, chi2, i, k, form="corrected"):
    """M_{s,i} at s = (1-k)/2 together with its symbolic form and case tag."""
    tag, sym = intertwining_symbolic(chi1, chi2, i, form=form)
    return IntertwiningConstant(sym.at_weight(chi1.p, k), sym, tag, i, k, form)




# ---------------------------------------------------------------------------
# the local new section and a direct evaluation of M_{s,i}

def root_of_unity_turn(z):
    """r in [0, 1) with z = exp(2 pi i r), for a CycNum root of unity z."""
    z = CycNum.coerce(z)
    n = 2 * z.order
    for j in range(n):
        if CycNum.zeta(n, j) == z:
            return Fraction(j, n)
    raise ValueError(f"{z} is not a root of unity")


def turns_to_cyc(terms):
    """sum of c * exp(2 pi i r) over a dict r -> c."""
    terms = {r: c for r, c in terms.items() if c}
    if not terms:
        return ZERO
    L = lcm(*[r.denominator for r in terms])
    dense = [Fraction(0)] * L
    for r, c in terms.items():
        dense[(r.numerator * (L // r.denominator)) % L] += c
    return CycNum.from_dense(L, dense)


class _TurnChar:
    """A LocalChar evaluated as turns (values exp(2 pi i r), r in Q/Z)."""

    def __init__(self, theta):
        self.p = theta.p
        self.e = theta.e
        self.q = theta.p ** theta.e
        u = theta.unit
        self.table = u.table
        self.order = u.order
        self.mod = u.modulus
        self.at_p = root_of_unity_turn(theta.at_p)

    def int_table(self, L):
        """turns of theta on Z/q as integers mod L (L a multiple of the order)."""
        f = L // self.order
        return [self.table[x % self.mod] * f % L for x in range(self.q)]

    def unit(self, x):
        """turn of theta on a p-adic unit x (a Fraction)."""
        if self.mod == 1:
            return Fraction(0)
        r = x.numerator * pow(x.denominator, -1, self.q) % self.q
        return Fraction(self.table[r % self.mod], self.order)

    def __call__(self, x):
        v, u = split_unit(x, self.p)
        return (self.unit(u) + v * self.at_p) % 1


class NewSection:
    """The normalized new section f_s in I(chi1|.|^s, chi2|.|^-s).

    f(b g) = chi1(a) chi2(d) |a/d|^(s+1/2) f(g), f(g k) = chi1 chi2(d_k) f(g)
    for k in K_0(p^N), N = e1 + e2, and on GL_2(Z_p) the support is
    B(Z_p) gamma_{e2} K_0(p^N) with f(gamma_{e2}) = chi1(p^-e2).  Here
    gamma_i = (1 0; p^i 1) for i < N and gamma_N = 1.

    Values are tracked as (turn, rational, a) meaning
    rational * exp(2 pi i turn) * Y^a with Y = p^(-2s).
    """

    def __init__(self, chi1, chi2):
        if chi1.p != chi2.p:
            raise ValueError("residue characteristics differ")
        self.chi1, self.chi2 = chi1, chi2
        self.p = chi1.p
        self.e1, self.e2 = chi1.e, chi2.e
        self.N = self.e1 + self.e2
        self._c1, self._c2 = _TurnChar(chi1), _TurnChar(chi2)
        self.norm = (-self.e2 * self._c1.at_p) % 1

    def on_compact(self, A, B, C, D):
        """Turn of f on an element of GL_2(Z_p), or None where f vanishes."""
        det = A * D - B * C
        j = padic_val(C, self.p)
        c1, c2 = self._c1, self._c2
        if j >= self.N:
            if self.e1:
                return None
            return (self.norm + c1.unit(D) + c2.unit(D)) % 1
        if j != self.e2:
            return None
        u = C / Fraction(self.p) ** j
        # k = b gamma_j (u, *; 0, k22) with d_b = 1
        k22 = D if j >= 1 else Fraction(1)
        return (self.norm + c1.unit(det / (u * k22)) + c1.unit(k22) + c2.unit(k22)) % 1

    def evaluate(self, A, B, C, D):
        """f(g) as (turn, rational, a), or None where f vanishes."""
        p = self.p
        A, B, C, D = (Fraction(x) for x in (A, B, C, D))
        det = A * D - B * C
        if D != 0 and padic_val(D, p) <= padic_val(C, p):
            a, d = det / D, D
            t = self.on_compact(Fraction(1), Fraction(0), C / D, Fraction(1))
        else:
            a, d = -det / C, C
            t = self.on_compact(Fraction(0), Fraction(1), Fraction(1), D / C)
        if t is None:
            return None
        v = padic_val(a / d, p)
        if v % 2:
            raise ValueError("odd valuation gives a half-integral power of Y")
        # |a/d|^(s+1/2) = Y^(v/2) p^(-v/2)
        return (t + self._c1(a) + self._c2(d)) % 1, Fraction(p) ** (-v // 2), v // 2

    def __call__(self, A, B, C, D):
        """f(g) as (CycNum, a) meaning value * Y^a."""
        out = self.evaluate(A, B, C, D)
        if out is None:
            return ZERO, 0
        t, c, a = out
        return turns_to_cyc({t: c}), a

    def turn_modulus(self):
        """Common denominator L of every turn the section produces."""
        c1, c2 = self._c1, self._c2
        return lcm(c1.order, c2.order, c1.at_p.denominator, c2.at_p.denominator,
                   self.norm.denominator)

    def phi_tables(self, L):
        """Integer data for phi(x) = f((1 0; x 1)), turns mod L.

        Returns a function (v, u) -> (turn, pexp, a) or None for x = p^v u,
        u a positive integer prime to p, meaning p^pexp * exp(2 pi i turn/L) * Y^a.
        Agrees with evaluate(1, 0, x, 1); the tests check this.
        """
        c1, c2 = self._c1, self._c2
        t1, t2 = c1.int_table(L), c2.int_table(L)
        q1, q2 = c1.q, c2.q
        at1 = c1.at_p.numerator * (L // c1.at_p.denominator)
        at2 = c2.at_p.numerator * (L // c2.at_p.denominator)
        norm = self.norm.numerator * (L // self.norm.denominator)
        e1, e2, N = self.e1, self.e2, self.N
        minus1 = t1[-1 % q1]

        def phi(v, u):
            if v >= 0:
                # x in Z_p: f on gamma_v
                if v >= N:
                    return None if e1 else (norm, 0, 0)
                if v != e2:
                    return None
                return ((norm - t1[u % q1]) % L, 0, 0)
            # x = (-1/x, 1; 0, x) w (1 1/x; 0 1), w = (0 1; 1 0)
            if N and e2:
                return None
            base = norm if not N else norm + minus1
            turn = base + t1[-pow(u, -1, q1) % q1] - v * at1 + t2[u % q2] + v * at2
            return (turn % L, v, -v)

        return phi


def _shell_integral(section, i, m):
    """Integral over v_p(n) = m of chi1^-1 chi2(n) |n|^-(2s+1) phi(1/n + p^i).

    Returns {exponent of Y: CycNum}.  The shell is cut into balls
    n in p^m (w + p^r Z_p) until the integrand is constant on each ball.
    """
    p = section.p
    c1, c2 = section._c1, section._c2
    emax = max(section.e1, section.e2, 1)
    N = section.N
    L = section.turn_modulus()
    phi = section.phi_tables(L)
    t1, t2 = c1.int_table(L), c2.int_table(L)
    q1, q2 = c1.q, c2.q
    # chi1^-1 chi2(p^m)
    shell_turn = m * (c2.at_p.numerator * (L // c2.at_p.denominator)
                      - c1.at_p.numerator * (L // c1.at_p.denominator))
    t = min(-m, i)
    counts = {}
    stack = [(w, 1) for w in range(1, p)]
    while stack:
        w, r = stack.pop()
        K = r + N + emax + 2
        # 1/n = p^-m wi for a point n of the ball
        wi = pow(w, -1, p ** K)
        X = wi * p ** (-m - t) + p ** (i - t)
        vX = 0
        while X % p == 0:
            X //= p
            vX += 1
        vx = t + vX
        slack = r - m  # the ball moves 1/n by elements of valuation >= slack
        ok = slack >= N if vx >= N else slack >= vx + emax
        if not ok or r < emax:
            pr = p ** r
            stack.extend((w + s * pr, r + 1) for s in range(p))
            continue
        val = phi(vx, X)
        if val is None:
            continue
        turn, pexp, a = val
        # |n|^-(2s+1) = p^m Y^-m, vol = p^(-m-r)
        turn = (turn + shell_turn - t1[w % q1] + t2[w % q2]) % L
        key = (a - m, turn, pexp - r)
        counts[key] = counts.get(key, 0) + 1
    acc = {}
    for (a, turn, pexp), c in counts.items():
        bucket = acc.setdefault(a, {})
        r = Fraction(turn, L)
        bucket[r] = bucket.get(r, 0) + c * Fraction(p) ** pexp
    out = {e: turns_to_cyc(b) for e, b in acc.items()}
    return {e: v for e, v in out.items() if v}


def _scale(poly, c, shift):
    return {e + shift: v * c for e, v in poly.items()}


def _poly_eq(a, b):
    return _poly_add(a, {e: -v for e, v in b.items()}) == {}


def intertwining_oracle(chi1, chi2, i, extra=3):
    """M_{s,i} computed from the integral definition, as a RationalY.

    Each shell v_p(n) = m is integrated exactly; both tails are geometric
    (ratio 1/p as m -> +oo, ratio chi1 chi2^-1(p) Y as m -> -oo), and the
    ratio is checked on ``extra`` consecutive shells before it is summed.
    """
    sec = NewSection(chi1, chi2)
    p = sec.p
    emax = max(sec.e1, sec.e2, 1)
    hi = max(1, emax - i) + 1
    lo = -(i + emax + 1) - 1
    rho = chi1(p) * chi2(p).inverse()
    inv_p = ONE / p
    while True:
        shells = {m: _shell_integral(sec, i, m) for m in range(lo - extra, hi + extra + 1)}
        up_ok = all(
            _poly_eq(shells[m + 1], _scale(shells[m], inv_p, 0)) for m in range(hi, hi + extra)
        )
        down_ok = all(
            _poly_eq(shells[m - 1], _scale(shells[m], rho, 1)) for m in range(lo, lo - extra, -1)
        )
        if up_ok and down_ok:
            break
        hi += 2
        lo -= 2
        if hi > 40:
            raise RuntimeError("shell integrals did not become geometric")
    total = RationalY({})
    for m in range(lo, hi + 1):
        total = total + RationalY(shells[m])
    # m > hi: shells[hi] * (1/p) / (1 - 1/p)
    total = total + RationalY(_scale(shells[hi], ONE / (p - 1), 0))
    # m < lo: shells[lo] * rho Y / (1 - rho Y)
    total = total + RationalY(_scale(shells[lo], rho, 1), {0: ONE, 1: -rho})
    return total


# ---------------------------------------------------------------------------
# finite Riemann sums over O_v / p^depth

def psi(x, p):
    """psi(x) = exp(-2 pi i {x}_p) as a CycNum."""
    x = Fraction(x)
    if x == 0:
        return ONE
    v, u = split_unit(x, p)
    if v >= 0:
        return ONE
    c = residue(u, p, -v)
    return CycNum.zeta(p ** -v, -c)


def _riemann(fn, p, m, depth, units_only):
    """sum over y mod p^depth of fn(p^m y) * vol, y restricted to units if asked."""
    vol = Fraction(1, p ** (m + depth)) if m + depth >= 0 else Fraction(p ** -(m + depth))
    out = ZERO
    pm = Fraction(p) ** m
    for y in range(p ** depth):
        if units_only and y % p == 0:
            continue
        out = out + fn(pm * y)
    return out * vol


def _catalog(spec):
    """(p, shell exponent m, units_only, constancy radius, integrand)."""
    kind = spec["kind"]
    if kind == "unit_volume":
        return spec["p"], 0, True, 1, lambda x: ONE
    if kind == "abs_power":
        p, k, s = spec["p"], spec["k"], spec["s"]
        return p, k, True, 1, lambda x: CycNum.rational(Fraction(p) ** (-padic_val(x, p) * s))
    if kind == "gamma":
        p, u = spec["p"], Fraction(spec["u"])
        k = spec.get("k", 0)
        radius = max(0, -(padic_val(u, p) + k)) if u else 0
        return p, k, False, radius, lambda x: psi(-u * x, p)
    if kind == "gauss_shell":
        theta, m = spec["theta"], spec["m"]
        return theta.p, m, True, max(theta.e, -m, 1), lambda x: theta(x) * psi(x, theta.p)
    if kind == "mixed_unit":
        # int_{O^x} theta1(1 + p^(e1-e2) x) theta2(x), e1 > e2
        t1, t2 = spec["theta1"], spec["theta2"]
        shift = t1.e - t2.e
        return t1.p, 0, True, max(t2.e, 1), lambda x: t1(1 + t1.p ** shift * x) * t2(x)
    if kind == "shifted_unit":
        # int_{O^x} theta1(p^(k-e1) + x) theta2(x), e1 = e2, k >= e1
        t1, t2, k = spec["theta1"], spec["theta2"], spec["k"]
        return t1.p, 0, True, max(t1.e, 1), lambda x: t1(Fraction(t1.p) ** (k - t1.e) + x) * t2(x)
    raise ValueError(f"unknown integrand kind {kind!r}")


RIEMANN_KINDS = ("unit_volume", "abs_power", "gamma", "gauss_shell", "mixed_unit", "shifted_unit")


def riemann_sum_oracle(spec, depth):
    """Exact Haar integral of a catalog integrand as a finite sum mod p^depth.

    ``spec`` is a dict with a ``kind`` from :data:`RIEMANN_KINDS` and its
    parameters.  The integrand is locally constant at its radius, so the sum
    is exact once ``depth`` reaches it; smaller depths are rejected.
    """
    p, m, units_only, radius, fn = _catalog(spec)
    if depth < radius:
        raise ValueError(f"depth {depth} below constancy radius {radius}")
    if spec["kind"] == "shifted_unit" and spec["k"] == spec["theta1"].e:
        return _shifted_unit_singular(spec["theta1"], spec["theta2"], depth)
    return _riemann(fn, p, m, depth, units_only)


def _shifted_unit_singular(t1, t2, depth):
    """int_{O^x} theta1(1 + x) theta2(x) dx, which is not locally constant at x = -1.

    Balls where 1 + x is a unit are summed at ``depth``; the rest is cut into
    shells y = 1 + x in p^v O^x, each an exact finite sum.  From v = e2 on,
    theta2(y - 1) = theta2(-1) and the shell integral of the ramified theta1
    vanishes; this is checked on two shells before the tail is dropped.
    """
    p = t1.p
    q = p ** depth
    out = ZERO
    for x in range(q):
        if x % p and (1 + x) % p:
            out = out + t1(1 + x) * t2(x)
    out = out / q
    v = 1
    while True:
        shell = _riemann(lambda y: t1(y) * t2(y - 1), p, v, max(t1.e, t2.e), True)
        if v >= t2.e:
            nxt = _riemann(lambda y: t1(y) * t2(y - 1), p, v + 1, max(t1.e, t2.e), True)
            if shell or nxt:
                raise RuntimeError("shell integrals did not vanish")
            return out
        out = out + shell
        v += 1


# ---------------------------------------------------------------------------
# identity suites

def _record(name, params, lhs, rhs):
    lhs, rhs = CycNum.coerce(lhs), CycNum.coerce(rhs)
    res = lhs - rhs
    return {"identity": name, "params": params, "pass": not res, "residual": str(res)}


def _ram_chars(max_modulus):
    from .exactmath import primes_upto

    out = []
    for p in primes_upto(max_modulus):
        e = 1
        while p ** e <= max_modulus:
            out.extend(local_chars(p, e))
            e += 1
    return out


def check_gauss_norms(moduli):
    out = []
    for q in moduli:
        (p, e), = factorint(q).items()
        for th in local_chars(p, e):
            tau = gauss_sum(th)
            out.append(_record("gauss_norm", {"p": p, "e": e, "char": th.unit.label()}, tau * tau.conj(), q))
    return out


def check_gauss_jacobi(max_modulus):
    """Both Gauss-Jacobi relations for ramified pairs with modulus <= max_modulus."""
    out = []
    chars = _ram_chars(max_modulus)
    by_p = {}
    for th in chars:
        by_p.setdefault(th.p, []).append(th)
    for p, group in by_p.items():
        for t1 in group:
            inv1 = t1.inverse()
            for t2 in group:
                params = {"p": p, "char1": t1.unit.label(), "char2": t2.unit.label()}
                mix = inv1 * t2
                lhs = gauss_sum(inv1) * gauss_sum(t2)
                if t1.e == t2.e:
                    s = mix.e
                    if s == 0:
                        continue
                    J = jacobi_sum(inv1, t2, p ** (t1.e - s), t1.e)
                    out.append(_record("gauss_jacobi_equal", params, J * gauss_sum(mix), lhs))
                else:
                    if t1.e > t2.e:
                        S = _mixed_sum(t2, inv1, t1.e - t2.e, t2.e)
                    else:
                        S = _mixed_sum(inv1, t2, t2.e - t1.e, t1.e)
                    out.append(_record("gauss_jacobi_unequal", params, gauss_sum(mix) * S, lhs))
    return out


def check_additive_twist(max_modulus):
    """sum_y theta(y) psi(x y / p^e) = theta^-1(x) tau(theta), or 0 for p | x."""
    out = []
    for th in _ram_chars(max_modulus):
        p, e = th.p, th.e
        q = p ** e
        for x in range(q):
            lhs = ZERO
            for y in range(q):
                if y % p:
                    lhs = lhs + th(y) * psi(Fraction(x * y, q), p)
            rhs = th.inverse()(x) * gauss_sum(th) if x % p else ZERO
            out.append(_record("additive_twist", {"p": p, "e": e, "char": th.unit.label(), "x": x}, lhs, rhs))
    return out


def check_riemann_catalog(max_modulus):
    out = []
    from .exactmath import primes_upto

    for p in primes_upto(min(max_modulus, 13)):
        q = Fraction(p)
        out.append(_record("unit_volume", {"p": p}, riemann_sum_oracle({"kind": "unit_volume", "p": p}, 1), (q - 1) / q))
        for k in (-2, 0, 1):
            for s in (-1, 0, 2):
                spec = {"kind": "abs_power", "p": p, "k": k, "s": s}
                out.append(_record("abs_power", spec, riemann_sum_oracle(spec, 1), (q - 1) / q * q ** (-k * (s + 1))))
        for u in (Fraction(1, p * p), Fraction(1, p), Fraction(3), Fraction(p, 7) if p != 7 else Fraction(2)):
            for k in (-1, 0, 2):
                spec = {"kind": "gamma", "p": p, "u": u, "k": k}
                depth = max(1, -(padic_val(u, p) + k))
                gam = 1 if padic_val(u * q ** k, p) >= 0 else 0
                out.append(_record("gamma_shift", {"p": p, "u": str(u), "k": k}, riemann_sum_oracle(spec, depth), q ** -k * gam))
    for th in _ram_chars(max_modulus):
        p, e = th.p, th.e
        for m in range(-e - 1, 1):
            if p ** max(e, -m) > max_modulus:
                continue
            spec = {"kind": "gauss_shell", "theta": th, "m": m}
            rhs = th(Fraction(1, p ** e)) * gauss_sum(th) if m == -e else ZERO
            out.append(_record("gauss_shell", {"p": p, "e": e, "char": th.unit.label(), "m": m},
                               riemann_sum_oracle(spec, max(e, -m, 1)), rhs))
    by_p = {}
    for th in _ram_chars(max_modulus):
        if th.p <= 13:
            by_p.setdefault(th.p, []).append(th)
    for p, group in by_p.items():
        for t1 in group:
            for t2 in group:
                params = {"p": p, "char1": t1.unit.label(), "char2": t2.unit.label()}
                if t1.e > t2.e:
                    spec = {"kind": "mixed_unit", "theta1": t1, "theta2": t2}
                    rhs = unit_sum(lambda x: t2(x) * t1(1 + p ** (t1.e - t2.e) * x), p, t2.e) / p ** t2.e
                    out.append(_record("mixed_unit", params, riemann_sum_oracle(spec, t1.e), rhs))
                elif t1.e == t2.e:
                    for k in (t1.e, t1.e + 1):
                        spec = {"kind": "shifted_unit", "theta1": t1, "theta2": t2, "k": k}
                        shift = p ** (k - t1.e)
                        # theta1 read mod p^e1, zero off the units
                        rhs = unit_sum(lambda x: t2(x) * t1.unit(shift + x), p, t1.e) / p ** t1.e
                        out.append(_record("shifted_unit", dict(params, k=k), riemann_sum_oracle(spec, t1.e + 1), rhs))
    return out


def intertwining_cases(max_level, at_p_values=(1,)):
    """(chi1, chi2, i) for every case instance with p^(e1+e2) <= max_level."""
    from .exactmath import primes_upto

    for p in primes_upto(max_level):
        N = 0
        while p ** (N + 1) <= max_level:
            N += 1
        for total in range(N + 1):
            for e1 in range(total + 1):
                e2 = total - e1
                for a1 in at_p_values:
                    for a2 in at_p_values:
                        for c1 in local_chars(p, e1, a1):
                            for c2 in local_chars(p, e2, a2):
                                for i in range(total + 1):
                                    yield c1, c2, i


def check_intertwining(max_level=125, weights=range(2, 7), at_p_values=(1,)):
    out = []
    for c1, c2, i in intertwining_cases(max_level, at_p_values):
        tag, sym = intertwining_symbolic(c1, c2, i)
        orc = intertwining_oracle(c1, c2, i)
        params = {"p": c1.p, "e1": c1.e, "e2": c2.e, "i": i, "case": tag,
                  "char1": c1.unit.label(), "char2": c2.unit.label()}
        for k in weights:
            Y = Fraction(c1.p) ** (k - 1)
            out.append(_record("intertwining", dict(params, k=k), sym(Y), orc(Y)))
    return out


def verify(max_modulus=27, max_level=125):
    """All local identity suites; returns a JSON-ready report."""
    moduli = [q for q in range(2, max_modulus + 1) if len(factorint(q)) == 1]
    records = (
        check_gauss_norms(moduli)
        + check_gauss_jacobi(max_modulus)
        + check_additive_twist(max_modulus)
        + check_riemann_catalog(max_modulus)
        + check_intertwining(max_level)
    )
    return {"records": records, "pass": all(r["pass"] for r in records), "count": len(records)}
