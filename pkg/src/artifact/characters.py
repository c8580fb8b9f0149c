"""Dirichlet characters with exact cyclotomic values.

A character of modulus M is stored as a table of exponents: chi(a) =
zeta_L^table[a] for units a, with L the exact order of chi, and -1 marking
non-units (where chi vanishes).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

from .exactmath import CycNum, ZERO, factorint, lcm, primitive_root


@lru_cache(maxsize=None)
def _local_generators(p, e):
    """Generators of (Z/p^e)^x with their orders."""
    q = p ** e
    if p == 2:
        if e == 1:
            return ()
        if e == 2:
            return ((3, 2),)
        return ((q - 1, 2), (5, q // 4))
    phi = q // p * (p - 1)
    qs = list(factorint(phi))
    for g in range(2, q):
        if g % p and all(pow(g, phi // r, q) != 1 for r in qs):
            return ((g, phi),)
    raise ValueError(q)


@lru_cache(maxsize=None)
def unit_generators(modulus):
    """Generators of (Z/modulus)^x, one block per prime power, lifted by CRT.

    Returns a tuple of (generator, order, prime).
    """
    out = []
    for p, e in sorted(factorint(modulus).items()):
        q = p ** e
        rest = modulus // q
        for g, order in _local_generators(p, e):
            if rest == 1:
                lifted = g % modulus
            else:
                # g mod q, 1 mod rest
                lifted = (g * rest * pow(rest, -1, q) + q * pow(q, -1, rest)) % modulus
            out.append((lifted, order, p))
    return tuple(out)


@lru_cache(maxsize=None)
def _dlog_table(modulus):
    """a -> tuple of generator exponents, for every unit a mod modulus."""
    gens = unit_generators(modulus)
    table = {}
    ranges = [range(order) for _, order, _ in gens]
    for exps in itertools.product(*ranges):
        a = 1
        for (g, _, _), k in zip(gens, exps):
            a = a * pow(g, k, modulus) % modulus
        table[a % modulus] = exps
    if modulus == 1:
        table = {0: ()}
    return table


class DirChar:
    """A Dirichlet character modulo ``modulus`` (not necessarily primitive)."""

    __slots__ = ("modulus", "order", "table", "_cache", "_values")

    def __init__(self, modulus, order, table):
        g = order
        for t in table:
            if t >= 0:
                g = math.gcd(g, t)
        if g > 1:
            order //= g
            table = tuple(t // g if t >= 0 else -1 for t in table)
        self.modulus = modulus
        self.order = order
        self.table = tuple(table)
        self._cache = {}
        self._values = None

    # construction -----------------------------------------------------
    @classmethod
    def trivial(cls, modulus=1):
        return cls(modulus, 1, tuple(0 if math.gcd(a, modulus) == 1 else -1 for a in range(modulus)))

    @classmethod
    def from_images(cls, modulus, images):
        """images[i] = (j, n) means generator i maps to zeta_n^j."""
        gens = unit_generators(modulus)
        if len(images) != len(gens):
            raise ValueError(f"modulus {modulus} has {len(gens)} generators")
        for (j, n), (_, order, _) in zip(images, gens):
            if (j * order) % n:
                raise ValueError("image order does not divide generator order")
        L = lcm(*[n for _, n in images]) if images else 1
        exps = [j * (L // n) % L for j, n in images]
        dl = _dlog_table(modulus)
        table = [-1] * modulus
        for a, ks in dl.items():
            table[a] = sum(k * x for k, x in zip(ks, exps)) % L
        return cls(modulus, L, table)

    @classmethod
    def from_function(cls, modulus, order, fn):
        """fn(a) -> exponent mod order for units a."""
        table = [fn(a) % order if math.gcd(a, modulus) == 1 else -1 for a in range(modulus)]
        return cls(modulus, order, table)

    # evaluation -------------------------------------------------------
    def exponent(self, a):
        """Exponent j with chi(a) = zeta_order^j, or None for non-units."""
        t = self.table[a % self.modulus]
        return None if t < 0 else t

    def __call__(self, a):
        t = self.table[a % self.modulus]
        if t < 0:
            return ZERO
        return CycNum.zeta(self.order, t)

    def images(self):
        """Generator images as (generator, order, j, n): value zeta_n^j."""
        out = []
        for g, order, _ in unit_generators(self.modulus):
            t = self.table[g]
            n = self.order // math.gcd(self.order, t)
            out.append((g, order, t * n // self.order, n))
        return out

    # structure --------------------------------------------------------
    @property
    def parity(self):
        if self.modulus <= 2:
            return 1
        return 1 if self.table[self.modulus - 1] == 0 else -1

    def is_even(self):
        return self.parity == 1

    def is_trivial(self):
        return self.order == 1

    @property
    def conductor(self):
        c = self._cache.get("conductor")
        if c is None:
            c = 1
            for p, e in factorint(self.modulus).items():
                c *= p ** _local_conductor_exponent(self, p, e)
            self._cache["conductor"] = c
        return c

    def is_primitive(self):
        return self.conductor == self.modulus

    def primitive(self):
        """The primitive character inducing this one."""
        f = self.conductor
        if f == self.modulus:
            return self
        hit = self._cache.get("primitive")
        if hit is not None:
            return hit
        M = self.modulus
        table = [-1] * f
        for a in range(f):
            if math.gcd(a, f) != 1:
                continue
            b = a
            while math.gcd(b, M) != 1:
                b += f
            table[a] = self.table[b % M]
        out = DirChar(f, self.order, table)
        self._cache["primitive"] = out
        return out

    def induce(self, modulus):
        """Same character viewed modulo a multiple of its modulus."""
        if modulus % self.modulus:
            raise ValueError("modulus must be a multiple")
        table = [
            self.table[a % self.modulus] if math.gcd(a, modulus) == 1 else -1
            for a in range(modulus)
        ]
        return DirChar(modulus, self.order, table)

    def local_components(self):
        """Map p -> character mod p^e whose product reproduces self."""
        hit = self._cache.get("local")
        if hit is not None:
            return hit
        M = self.modulus
        out = {}
        for p, e in sorted(factorint(M).items()):
            q = p ** e
            rest = M // q
            table = [-1] * q
            for x in range(q):
                if x % p == 0:
                    continue
                if rest == 1:
                    y = x
                else:
                    y = (x * rest * pow(rest, -1, q) + q * pow(q, -1, rest)) % M
                table[x] = self.table[y]
            out[p] = DirChar(q, self.order, table)
        self._cache["local"] = out
        return out

    def component(self, p):
        """Local component at p; the trivial character mod 1 if p does not divide the modulus."""
        return self.local_components().get(p, DirChar.trivial(1))

    def inverse(self):
        return DirChar(
            self.modulus, self.order, tuple((-t) % self.order if t >= 0 else -1 for t in self.table)
        )

    def __mul__(self, other):
        return char_mul(self, other)

    def __pow__(self, e):
        e %= self.order
        return DirChar(self.modulus, self.order, tuple(t * e % self.order if t >= 0 else -1 for t in self.table))

    def __eq__(self, other):
        return (
            isinstance(other, DirChar)
            and self.modulus == other.modulus
            and self.order == other.order
            and self.table == other.table
        )

    def __hash__(self):
        return hash((self.modulus, self.order, self.table))

    def __repr__(self):
        imgs = ", ".join(f"{g}->z{n}^{j}" if n > 1 else f"{g}->1" for g, _, j, n in self.images())
        return f"DirChar(mod {self.modulus}, cond {self.conductor}, [{imgs}])"

    def label(self):
        imgs = ",".join(f"{j}/{n}" for _, _, j, n in self.images())
        return f"{self.modulus}:[{imgs}]"

    def to_json(self):
        return {
            "modulus": self.modulus,
            "generator_images": [
                {"generator": g, "order": o, "image_exponent": j, "image_order": n}
                for g, o, j, n in self.images()
            ],
            "parity": self.parity,
        }

    @classmethod
    def from_json(cls, data):
        imgs = [(d["image_exponent"], d["image_order"]) for d in data["generator_images"]]
        return cls.from_images(data["modulus"], imgs)


def _local_conductor_exponent(chi, p, e):
    M = chi.modulus
    q = p ** e
    rest = M // q
    comp_lift = []
    for x in range(q):
        if x % p == 0:
            continue
        y = x if rest == 1 else (x * rest * pow(rest, -1, q) + q * pow(q, -1, rest)) % M
        comp_lift.append((x, chi.table[y]))
    for f in range(e + 1):
        pf = p ** f
        if all(t == 0 for x, t in comp_lift if (x - 1) % pf == 0):
            return f
    return e


def char_eval(chi, a):
    """chi(a), zero on non-units."""
    return chi(a)


def char_mul(chi, psi):
    """Primitive character inducing the pointwise product."""
    M = lcm(chi.modulus, psi.modulus)
    L = lcm(chi.order, psi.order)
    s1, s2 = L // chi.order, L // psi.order
    table = []
    for a in range(M):
        if math.gcd(a, M) != 1:
            table.append(-1)
        else:
            table.append((chi.table[a % chi.modulus] * s1 + psi.table[a % psi.modulus] * s2) % L)
    return DirChar(M, L, table).primitive()


def teichmuller_char(p, exponent=1):
    """omega^exponent mod p, with omega(g) = zeta_{p-1} at the smallest primitive root g."""
    if p == 2:
        raise ValueError("p must be odd")
    g = primitive_root(p)
    gens = unit_generators(p)
    assert gens[0][0] == g
    return DirChar.from_images(p, [(exponent % (p - 1), p - 1)])


def enumerate_chars(modulus, parity=None, order_divides=None, primitive_only=False):
    """All characters mod ``modulus`` meeting the constraints, in a fixed order."""
    gens = unit_generators(modulus)
    out = []
    for js in itertools.product(*[range(order) for _, order, _ in gens]):
        chi = DirChar.from_images(modulus, [(j, order) for j, (_, order, _) in zip(js, gens)])
        if parity is not None and chi.parity != parity:
            continue
        if order_divides is not None and order_divides % chi.order:
            continue
        if primitive_only and not chi.is_primitive():
            continue
        out.append(chi)
    return out


@lru_cache(maxsize=None)
def primitive_chars(conductor):
    """All primitive characters of the given conductor (cached)."""
    return tuple(enumerate_chars(conductor, primitive_only=True))


# ---------------------------------------------------------------------------
# Conrey labels

def from_conrey(modulus, index):
    """The Conrey character chi_modulus(index, .)."""
    if math.gcd(index, modulus) != 1:
        raise ValueError("Conrey index must be a unit")
    L = 1
    parts = []
    for p, e in sorted(factorint(modulus).items()):
        q = p ** e
        parts.append((p, e, q))
        L = lcm(L, 2 if p == 2 else q // p * (p - 1))
        if p == 2 and e >= 3:
            L = lcm(L, q // 4)
    table = [-1] * modulus
    local_logs = {}
    for p, e, q in parts:
        local_logs[p] = _conrey_local_logs(p, e)
    for a in range(modulus):
        if math.gcd(a, modulus) != 1:
            continue
        t = 0
        for p, e, q in parts:
            fn = local_logs[p]
            t += fn(index % q, a % q, L)
        table[a] = t % L
    return DirChar(modulus, L, table)


def _conrey_local_logs(p, e):
    q = p ** e
    if p == 2:
        if e == 1:
            return lambda n, m, L: 0
        # n = (-1)^a 5^b
        logs = {}
        x = 1
        for b in range(max(q // 4, 1)):
            logs[x] = (0, b)
            logs[(-x) % q] = (1, b)
            x = x * 5 % q
        def fn(n, m, L):
            an, bn = logs[n]
            am, bm = logs[m]
            val = (an * am) * (L // 2)
            if e >= 3:
                val += bn * bm * (L // (q // 4))
            return val
        return fn
    g = _local_generators(p, e)[0][0]
    phi = q // p * (p - 1)
    logs = {}
    x = 1
    for k in range(phi):
        logs[x] = k
        x = x * g % q
    return lambda n, m, L: logs[n] * logs[m] * (L // phi)
