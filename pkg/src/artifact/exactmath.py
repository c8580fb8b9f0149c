"""Exact arithmetic substrate.

Rationals are :class:`fractions.Fraction`.  Cyclotomic numbers are kept as
rational polynomials in ``zeta_n`` reduced modulo the ``n``-th cyclotomic
polynomial (via python-flint), which makes equality a comparison of
coefficient vectors.  Truncated Iwasawa-algebra elements live in
``R[T]/(T^n)`` where ``R = (Z/p^m)[x]/Phi_r(x)``; ``r = 1`` gives plain
``Z/p^m``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from flint import fmpq, fmpq_poly, fmpz_poly

Rat = Fraction


# ---------------------------------------------------------------------------
# small integer helpers

def factorint(n):
    """Prime factorisation of a positive integer as a sorted dict."""
    n = abs(int(n))
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n):
    if n < 2:
        return False
    return factorint(n) == {n: 1}


def primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"[: min(2, n + 1)]
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


@lru_cache(maxsize=1 << 16)
def _divisors(n):
    ds = [1]
    for p, e in factorint(n).items():
        ds = [d * p ** i for d in ds for i in range(e + 1)]
    return tuple(sorted(ds))


def divisors(n):
    return list(_divisors(n))


@lru_cache(maxsize=None)
def euler_phi(n):
    r = n
    for p in factorint(n):
        r = r // p * (p - 1)
    return r


def moebius(n):
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def valuation(x, p):
    """p-adic valuation of a nonzero integer or Fraction."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out


# ---------------------------------------------------------------------------
# cyclotomic numbers

@lru_cache(maxsize=None)
def _phi_poly(n):
    return fmpq_poly(fmpz_poly.cyclotomic(n))


@lru_cache(maxsize=None)
def _zeta_power(n, j):
    j %= n
    coeffs = [0] * (j + 1)
    coeffs[j] = 1
    return fmpq_poly(coeffs) % _phi_poly(n)


@lru_cache(maxsize=None)
def _ramanujan_weight(n, j):
    # average of zeta_n^j over its Galois conjugates
    g = math.gcd(j, n)
    m = n // g
    return Fraction(moebius(m), euler_phi(m))


class CycNum:
    """An element of Q(zeta_n), stored reduced modulo Phi_n.

    Mixed-order arithmetic promotes both operands to the lcm of the orders.
    Rational values are normalised to order 1.
    """

    __slots__ = ("order", "poly")

    def __init__(self, order, poly):
        self.order = order
        self.poly = poly
        if order != 1 and poly.degree() <= 0:
            self.order = 1

    # construction -----------------------------------------------------
    @classmethod
    def rational(cls, x):
        x = Fraction(x)
        return cls(1, fmpq_poly([fmpq(x.numerator, x.denominator)]))

    @classmethod
    def zeta(cls, n, j=1):
        if n <= 2:
            return cls.rational(1 if (n == 1 or j % 2 == 0) else -1)
        return cls(n, _zeta_power(n, j))

    @classmethod
    def from_coeffs(cls, n, coeffs):
        """Build sum c_j zeta_n^j from a list or a dict j -> c_j."""
        items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
        dense = [0] * n
        for j, c in items:
            dense[j % n] += Fraction(c)
        return cls.from_dense(n, dense)

    @classmethod
    def from_dense(cls, n, dense):
        """Sum of dense[j] * zeta_n^j for a length-n list of rationals/ints."""
        if n == 1:
            return cls.rational(dense[0])
        if n == 2:
            return cls.rational(Fraction(dense[0]) - Fraction(dense[1]))
        if all(type(c) is int for c in dense):
            poly = fmpq_poly(dense)
        else:
            poly = fmpq_poly([_to_fmpq(c) for c in dense])
        return cls(n, poly % _phi_poly(n))

    @staticmethod
    def coerce(x):
        if isinstance(x, CycNum):
            return x
        if isinstance(x, (int, Fraction)):
            return CycNum.rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to CycNum")

    # representation ---------------------------------------------------
    def coeffs(self):
        """Canonical coefficient vector (length phi(order))."""
        deg = euler_phi(self.order)
        raw = self.poly.coeffs()
        out = [Fraction(int(c.p), int(c.q)) for c in raw]
        return out + [Fraction(0)] * (deg - len(out))

    def is_rational(self):
        return self.poly.degree() <= 0

    def to_rational(self):
        if not self.is_rational():
            raise ValueError("not rational")
        if self.poly.degree() < 0:
            return Fraction(0)
        c = self.poly[0]
        return Fraction(int(c.p), int(c.q))

    def denominator(self):
        return int(self.poly.denom())

    def to_complex(self):
        import cmath

        z = cmath.exp(2j * cmath.pi / self.order)
        return sum(float(c) * z ** j for j, c in enumerate(self.coeffs()))

    def promote(self, n):
        if n == self.order:
            return self
        if n % self.order:
            raise ValueError(f"cannot promote order {self.order} to {n}")
        step = n // self.order
        raw = self.poly.coeffs()
        dense = [0] * (step * max(len(raw) - 1, 0) + 1)
        for j, c in enumerate(raw):
            dense[j * step] = c
        poly = fmpq_poly(dense) % _phi_poly(n)
        out = CycNum.__new__(CycNum)
        out.order, out.poly = n, poly
        return out

    def _pair(self, other):
        other = CycNum.coerce(other)
        if other.order == self.order:
            return self.order, self.poly, other.poly
        if other.order == 1:
            return self.order, self.poly, other.poly
        if self.order == 1:
            return other.order, self.poly, other.poly
        n = lcm(self.order, other.order)
        return n, self.promote(n).poly, other.promote(n).poly

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return CycNum(n, a + b)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return CycNum(n, a - b)

    def __rsub__(self, other):
        return CycNum.coerce(other) - self

    def __neg__(self):
        return CycNum(self.order, -self.poly)

    def __mul__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        prod = a * b
        if n > 2 and prod.degree() >= euler_phi(n):
            prod = prod % _phi_poly(n)
        return CycNum(n, prod)

    __rmul__ = __mul__

    def inverse(self):
        if self.poly.degree() < 0:
            raise ZeroDivisionError("CycNum division by zero")
        if self.order == 1:
            return CycNum(1, fmpq_poly([1 / self.poly[0]]))
        g, s, _ = self.poly.xgcd(_phi_poly(self.order))
        # g is a nonzero constant since Phi_n is irreducible
        return CycNum(self.order, s / g[0])

    def __truediv__(self, other):
        try:
            other = CycNum.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CycNum.coerce(other) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNum.rational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self):
        return cyc_conj(self)

    def galois(self, a):
        """Image under zeta_n -> zeta_n^a (gcd(a, n) = 1)."""
        n = self.order
        if n == 1:
            return self
        dense = [0] * n
        for j, c in enumerate(self.poly.coeffs()):
            dense[(j * a) % n] += c
        return CycNum(n, fmpq_poly(dense) % _phi_poly(n))

    def trace_average(self):
        """Tr(x)/[Q(zeta_n):Q]; independent of the order used to store x."""
        return sum(
            (c * _ramanujan_weight(self.order, j) for j, c in enumerate(self.coeffs())),
            Fraction(0),
        )

    def norm(self):
        """Field norm from Q(zeta_order) to Q."""
        n = self.order
        if n == 1:
            return self.to_rational()
        out = CycNum.rational(1)
        for a in range(1, n):
            if math.gcd(a, n) == 1:
                out = out * self.galois(a)
        return out.to_rational()

    # comparison -------------------------------------------------------
    def __eq__(self, other):
        try:
            _, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return a == b

    def __hash__(self):
        if self.is_rational():
            return hash(self.to_rational())
        return hash(("cyc", self.trace_average()))

    def __bool__(self):
        return self.poly.degree() >= 0

    def __repr__(self):
        if self.is_rational():
            return str(self.to_rational())
        terms = []
        for j, c in enumerate(self.coeffs()):
            if c == 0:
                continue
            mono = "1" if j == 0 else (f"z{self.order}" if j == 1 else f"z{self.order}^{j}")
            terms.append(mono if c == 1 and j else f"{c}*{mono}" if j else str(c))
        return " + ".join(terms)

    # serialisation ----------------------------------------------------
    def to_json(self):
        return {
            "order": self.order,
            "coeffs": [[c.numerator, c.denominator] for c in self.coeffs()],
        }

    @classmethod
    def from_json(cls, data):
        return cls.from_coeffs(data["order"], [Fraction(a, b) for a, b in data["coeffs"]])


def _to_fmpq(c):
    if isinstance(c, fmpq):
        return c
    c = Fraction(c)
    return fmpq(c.numerator, c.denominator)


def cyc_conj(x):
    """Complex conjugation zeta_n -> zeta_n^{-1}."""
    x = CycNum.coerce(x)
    return x.galois(-1)


ZERO = CycNum.rational(0)
ONE = CycNum.rational(1)


# ---------------------------------------------------------------------------
# p-adic residue rings

def teichmuller(a, p, m):
    """Teichmuller lift of a mod p, as an integer mod p^m."""
    if a % p == 0:
        return 0
    pm = p ** m
    return pow(a % pm, p ** (m - 1), pm)


@lru_cache(maxsize=None)
def primitive_root(p):
    """Smallest generator of (Z/p)^x by order search."""
    if p == 2:
        return 1
    phi = p - 1
    qs = list(factorint(phi))
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in qs):
            return g
    raise ValueError(p)


class ResidueRing:
    """R = (Z/p^m)[x]/Phi_r(x), elements are tuples of length phi(r).

    Cyclotomic numbers map into R by sending roots of unity of order
    dividing p-1 to Teichmuller lifts (zeta_{p-1} -> teich(g), g the
    smallest primitive root mod p) and roots of order dividing r to powers
    of x.  This needs gcd(r, p-1) = 1.
    """

    def __init__(self, p, m, r=1):
        if math.gcd(r, p - 1) != 1:
            raise ValueError(f"extension order {r} must be prime to p-1={p - 1}")
        self.p, self.m, self.r = p, m, r
        self.mod = p ** m
        self.dim = euler_phi(r)
        phi = [int(c) for c in fmpz_poly.cyclotomic(r).coeffs()]
        # x^dim = -sum phi[j] x^j
        self._red = []
        cur = [(-phi[j]) % self.mod for j in range(self.dim)]
        for _ in range(self.dim - 1):
            self._red.append(cur)
            nxt = [0] + cur[:-1]
            top = cur[-1]
            cur = [(nxt[j] + top * cur[j]) % self.mod for j in range(self.dim)]
        self._red.append(cur)
        self.zero = (0,) * self.dim
        self.one = (1,) + (0,) * (self.dim - 1)
        self._tg = teichmuller(primitive_root(p), p, m) if p > 2 else 1
        self._img_cache = {}

    def __eq__(self, other):
        return isinstance(other, ResidueRing) and (self.p, self.m, self.r) == (
            other.p,
            other.m,
            other.r,
        )

    def __hash__(self):
        return hash((self.p, self.m, self.r))

    def __repr__(self):
        return f"ResidueRing(p={self.p}, m={self.m}, r={self.r})"

    def scalar(self, a):
        a = Fraction(a)
        if a.denominator % self.p == 0:
            raise ValueError(f"{a} is not {self.p}-integral")
        v = a.numerator * pow(a.denominator, -1, self.mod) % self.mod
        return (v,) + (0,) * (self.dim - 1)

    def add(self, a, b):
        mod = self.mod
        return tuple((x + y) % mod for x, y in zip(a, b))

    def sub(self, a, b):
        mod = self.mod
        return tuple((x - y) % mod for x, y in zip(a, b))

    def neg(self, a):
        mod = self.mod
        return tuple((-x) % mod for x in a)

    def smul(self, c, a):
        mod = self.mod
        return tuple(c * x % mod for x in a)

    def mul(self, a, b):
        d = self.dim
        mod = self.mod
        if d == 1:
            return (a[0] * b[0] % mod,)
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        out = prod[:d]
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                red = self._red[k - d]
                for j in range(d):
                    out[j] += c * red[j]
        return tuple(x % mod for x in out)

    def pow(self, a, e):
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def is_zero(self, a):
        return not any(a)

    def is_unit(self, a):
        if self.dim == 1:
            return a[0] % self.p != 0
        try:
            self._inv_mod_p(a)
        except ZeroDivisionError:
            return False
        return True

    def inv(self, a):
        if self.dim == 1:
            return (pow(a[0], -1, self.mod),)
        # Newton iteration from an inverse mod p
        y = self._inv_mod_p(a)
        prec = 1
        two = self.scalar(2)
        while prec < self.m:
            y = self.mul(y, self.sub(two, self.mul(a, y)))
            prec *= 2
        return y

    def _inv_mod_p(self, a):
        from flint import nmod_poly

        p = self.p
        phi = nmod_poly([int(c) for c in fmpz_poly.cyclotomic(self.r).coeffs()], p)
        g, s, _ = nmod_poly([x % p for x in a], p).xgcd(phi)
        if g.degree() != 0:
            raise ZeroDivisionError("non-unit in residue ring")
        ginv = pow(int(g[0]), -1, p)
        coeffs = [int(c) * ginv % p for c in s.coeffs()]
        coeffs += [0] * (self.dim - len(coeffs))
        return tuple(coeffs[: self.dim])

    def _zeta_image(self, n, j):
        key = (n, j % n)
        hit = self._img_cache.get(key)
        if hit is not None:
            return hit
        p, r = self.p, self.r
        ng = 1
        nb = 1
        for q, e in factorint(n).items():
            if r % (q ** e) == 0:
                nb *= q ** e
            elif (p - 1) % (q ** e) == 0:
                ng *= q ** e
            else:
                raise ValueError(
                    f"root of unity of order {n} does not fit {self!r}"
                )
        j %= n
        a = j * pow(nb, -1, ng) % ng if ng > 1 else 0
        b = j * pow(ng, -1, nb) % nb if nb > 1 else 0
        t = pow(self._tg, a * (p - 1) // ng, self.mod)
        xe = b * (r // nb)
        xpow = self._x_power(xe)
        out = self.smul(t, xpow)
        self._img_cache[key] = out
        return out

    def _x_power(self, e):
        e %= max(self.r, 1)
        if self.dim == 1:
            return self.one
        x = (0, 1) + (0,) * (self.dim - 2)
        return self.pow(x, e)

    def from_cyc(self, z):
        """Image of a CycNum that is integral at the prime this embedding picks.

        Coefficients may carry p in their denominators when p splits in the
        field of z, e.g. (-4 + 2i)/5 with i -> teich(2) for p = 5.
        """
        z = CycNum.coerce(z)
        d = z.denominator()
        v = valuation(d, self.p) if d % self.p == 0 else 0
        if v:
            big = ResidueRing(self.p, self.m + v, self.r)
            img = big._from_cyc_integral(z * d)
            q = self.p ** v
            if any(c % q for c in img):
                raise ValueError(f"{z} is not integral under the embedding")
            unit = pow(d // q, -1, self.mod)
            return tuple(c // q * unit % self.mod for c in img)
        return self._from_cyc_integral(z)

    def _from_cyc_integral(self, z):
        out = self.zero
        for j, c in enumerate(z.coeffs()):
            if c:
                out = self.add(out, self.smul(self.scalar(c)[0], self._zeta_image(z.order, j)))
        return out

    def to_int(self, a):
        if any(a[1:]):
            raise ValueError("element is not in Z/p^m")
        return a[0]


def ring_needed_for(p, orders):
    """Smallest extension order r such that values of the given orders map."""
    r = 1
    for n in orders:
        for q, e in factorint(n).items():
            if (p - 1) % (q ** e) != 0:
                r = lcm(r, q ** e)
    return r


# ---------------------------------------------------------------------------
# truncated power series over a residue ring

class PadicSeries:
    """Element of R[T]/(T^n) with R = (Z/p^m)[zeta_r]."""

    __slots__ = ("ring", "n", "coeffs")

    def __init__(self, ring, n, coeffs):
        self.ring = ring
        self.n = n
        cs = [tuple(c) for c in coeffs[:n]]
        cs += [ring.zero] * (n - len(cs))
        self.coeffs = cs

    @property
    def p(self):
        return self.ring.p

    @property
    def m(self):
        return self.ring.m

    @classmethod
    def from_ints(cls, p, m, n, ints, r=1):
        ring = ResidueRing(p, m, r)
        return cls(ring, n, [ring.scalar(c) for c in ints])

    @classmethod
    def constant(cls, ring, n, c):
        return cls(ring, n, [c])

    @classmethod
    def T(cls, ring, n):
        return cls(ring, n, [ring.zero, ring.one])

    def _check(self, other):
        if not isinstance(other, PadicSeries):
            raise TypeError("PadicSeries expected")
        if other.ring != self.ring or other.n != self.n:
            raise ValueError("PadicSeries parameters differ")

    def __add__(self, other):
        self._check(other)
        R = self.ring
        return PadicSeries(R, self.n, [R.add(a, b) for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        R = self.ring
        return PadicSeries(R, self.n, [R.sub(a, b) for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        R = self.ring
        return PadicSeries(R, self.n, [R.neg(a) for a in self.coeffs])

    def __mul__(self, other):
        R = self.ring
        if not isinstance(other, PadicSeries):
            c = R.scalar(other) if isinstance(other, (int, Fraction)) else tuple(other)
            return self.scale(c)
        self._check(other)
        n = self.n
        if R.dim == 1:
            mod = R.mod
            a = [c[0] for c in self.coeffs]
            b = [c[0] for c in other.coeffs]
            out = [0] * n
            for i, x in enumerate(a):
                if x:
                    for j in range(n - i):
                        out[i + j] += x * b[j]
            return PadicSeries(R, n, [(v % mod,) for v in out])
        out = [R.zero] * n
        for i, x in enumerate(self.coeffs):
            if R.is_zero(x):
                continue
            for j in range(n - i):
                out[i + j] = R.add(out[i + j], R.mul(x, other.coeffs[j]))
        return PadicSeries(R, n, out)

    __rmul__ = __mul__

    def scale(self, c):
        R = self.ring
        return PadicSeries(R, self.n, [R.mul(c, a) for a in self.coeffs])

    def __eq__(self, other):
        return (
            isinstance(other, PadicSeries)
            and self.ring == other.ring
            and self.n == other.n
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.ring, self.n, tuple(self.coeffs)))

    def __repr__(self):
        if self.ring.dim == 1:
            body = [c[0] for c in self.coeffs]
        else:
            body = self.coeffs
        return f"PadicSeries(p={self.p}, m={self.m}, n={self.n}, {body})"

    def is_unit(self):
        return self.ring.is_unit(self.coeffs[0])

    def inverse(self):
        if not self.is_unit():
            raise ZeroDivisionError("series with non-unit constant term")
        R = self.ring
        inv0 = R.inv(self.coeffs[0])
        out = [inv0]
        for k in range(1, self.n):
            acc = R.zero
            for j in range(1, k + 1):
                acc = R.add(acc, R.mul(self.coeffs[j], out[k - j]))
            out.append(R.neg(R.mul(inv0, acc)))
        return PadicSeries(R, self.n, out)

    def valuation_T(self):
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                return i
        return None

    def compose_affine(self, a):
        """F(a(1+T) - 1) for an integer a = 1 mod p.

        Coefficient j is exact mod p^min(m, n-j); callers pad n accordingly.
        """
        R = self.ring
        if (a - 1) % R.p:
            raise ValueError("affine substitution needs a = 1 mod p")
        n = self.n
        c = (a - 1) % R.mod
        # (c + aT)^i expanded with binomials, accumulated by Horner
        lin = PadicSeries(R, n, [R.scalar(c), R.scalar(a)])
        out = PadicSeries(R, n, [self.coeffs[-1]])
        for coeff in reversed(self.coeffs[:-1]):
            out = out * lin
            out.coeffs[0] = R.add(out.coeffs[0], coeff)
        return out

    def truncate(self, n):
        return PadicSeries(self.ring, n, self.coeffs[:n])

    def to_json(self):
        cs = [c[0] for c in self.coeffs] if self.ring.dim == 1 else [list(c) for c in self.coeffs]
        return {"p": self.p, "m": self.m, "n": self.n, "ext": self.ring.r, "coeffs": cs}

    @classmethod
    def from_json(cls, data):
        ring = ResidueRing(data["p"], data["m"], data.get("ext", 1))
        cs = data["coeffs"]
        cs = [(c,) if isinstance(c, int) else tuple(c) for c in cs]
        return cls(ring, data["n"], cs)


def series_eval(f, t0):
    """Evaluate f at T = t0 with p | t0.

    Exact modulo p^m whenever f.n >= m: the discarded terms t0^i, i >= n,
    vanish mod p^m.
    """
    R = f.ring
    if isinstance(t0, int):
        if t0 % R.p:
            raise ValueError("series_eval needs t0 = 0 mod p")
        t = R.scalar(t0)
    else:
        t = tuple(t0)
        if R.dim == 1 and t[0] % R.p:
            raise ValueError("series_eval needs t0 = 0 mod p")
    acc = R.zero
    for c in reversed(f.coeffs):
        acc = R.add(R.mul(acc, t), c)
    return acc


def _vp_factorial(i, p):
    v, q = 0, p
    while q <= i:
        v += i // q
        q *= p
    return v


def binomial_power(s, p, m, n, sprec=None, ring=None):
    """(1+T)^s mod (p^m, T^n) for a p-adic exponent s known mod p^sprec.

    ``sprec=None`` means s is an exact integer (negative allowed).
    """
    ring = ring or ResidueRing(p, m)
    if sprec is not None:
        need = m + _vp_factorial(n - 1, p)
        if sprec < need:
            raise ValueError(
                f"exponent known mod {p}^{sprec}; need {p}^{need} for m={m}, n={n}"
            )
        s %= p ** sprec
    coeffs = []
    num, den = 1, 1
    for i in range(n):
        if i:
            num *= s - i + 1
            den *= i
        c = Fraction(num, den)
        coeffs.append(ring.scalar(c))
    return PadicSeries(ring, n, coeffs)
