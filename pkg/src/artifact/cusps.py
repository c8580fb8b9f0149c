"""Cusps of Gamma_1(N) and Gamma_0(N), constant terms of Eisenstein series.

A cusp is a/c with a witness (a b; c d) in SL_2(Z).  Two formulas give the
constant term of E_k(chi1, chi2) at a cusp: the classical closed form and a
product of local factors (intertwining constants and epsilon factors from
``localsums``) evaluated at the inverse witness.  The module also carries
the Hecke action on the cusp divisor module and the ordinary projector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from flint import nmod_mat

from .characters import DirChar
from .eisenstein import QExpansion, check_parity, hecke_T, partial_L
from .exactmath import ONE, ZERO, CycNum, factorint, lcm
from .localsums import LocalChar, dirichlet_gauss_sum, epsilon_factor, intertwining_constant

GAMMA0 = "g0"
GAMMA1 = "g1"


# ---------------------------------------------------------------------------
# cusps

def _witness(a, c):
    """(a b; c d) in SL_2(Z) with first column (a, c)."""
    if c == 0:
        if a not in (1, -1):
            raise ValueError("a/0 needs a = +-1")
        return (a, 0, 0, a)
    g, x, y = _xgcd(a, c)
    if g != 1:
        raise ValueError(f"gcd({a}, {c}) != 1")
    # a x + c y = 1, so (a -y; c x) has determinant 1
    return (a, -y, c, x)


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def cusp_key(a, c, N, group=GAMMA1):
    """Invariant deciding equivalence of a/c under Gamma_1(N) or Gamma_0(N)."""
    if group == GAMMA1:
        c0 = c % N
        g = math.gcd(c0, N)
        return min((c0, a % g), ((-c) % N, (-a) % g))
    if group == GAMMA0:
        d = math.gcd(c, N)
        m = math.gcd(d, N // d)
        return (d, a * (c // d) % m)
    raise ValueError(f"unknown group {group!r}")


@dataclass(frozen=True)
class Cusp:
    a: int
    c: int
    level: int
    group: str = GAMMA1
    witness: tuple = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.c < 0 or math.gcd(self.a, self.c) != 1:
            raise ValueError(f"bad cusp {self.a}/{self.c}")
        if self.witness is None:
            object.__setattr__(self, "witness", _witness(self.a, self.c))
        a, b, c, d = self.witness
        if (a, c) != (self.a, self.c) or a * d - b * c != 1:
            raise ValueError("witness must have determinant 1 and first column (a, c)")

    @property
    def key(self):
        return cusp_key(self.a, self.c, self.level, self.group)

    @property
    def width(self):
        N = self.level
        return N // math.gcd(self.c * self.c, N)

    def is_infinity(self):
        return self.key == cusp_key(1, 0, self.level, self.group)

    def label(self):
        return "oo" if self.c == 0 else f"{self.a}/{self.c}"

    def to_json(self):
        return {"a": self.a, "c": self.c, "level": self.level, "group": self.group,
                "witness": list(self.witness)}

    def __repr__(self):
        return f"Cusp({self.label()}, N={self.level}, {self.group})"


def _lift(c0, a0, N):
    """A cusp a/c with c = c0 (c0 = 0 read as N) and a = a0 mod gcd(c0, N)."""
    if c0 == 0 and a0 % N in (1, N - 1 if N > 2 else 1):
        return 1, 0
    c = c0 or N
    g = math.gcd(c, N)
    a = a0 % g if g > 1 else 1
    while math.gcd(a, c) != 1:
        a += g
    return a, c


def enumerate_cusps(N, group=GAMMA1):
    """Complete irredundant list of cusps, with small denominators."""
    if N < 1:
        raise ValueError("level must be positive")
    seen = {}
    for c0 in range(N):
        g = math.gcd(c0, N)
        for a0 in range(g):
            if math.gcd(a0, g) != 1:
                continue
            a, c = _lift(c0, a0, N)
            key = cusp_key(a, c, N, group)
            if key not in seen:
                seen[key] = Cusp(a, c, N, group)
    out = list(seen.values())
    out.sort(key=lambda s: (s.c if s.c else -1, s.a))
    return out


def reduce_cusp(a, c, N, group=GAMMA1, table=None):
    """The canonical cusp equivalent to a/c (any integers, not both zero)."""
    g = math.gcd(a, c)
    a, c = a // g, c // g
    table = table if table is not None else {s.key: s for s in enumerate_cusps(N, group)}
    return table[cusp_key(a, c, N, group)]


def orbit_count_oracle(N, group=GAMMA1):
    """Number of orbits of order-N vectors (a, c) mod N, brute force.

    Gamma_1(N) acts through (1 t; 0 1) and -1, Gamma_0(N) also through
    diag(x, 1/x).
    """
    units = [x for x in range(N) if math.gcd(x, N) == 1] if group == GAMMA0 else [1]
    todo = {(a, c) for a in range(N) for c in range(N) if math.gcd(math.gcd(a, c), N) == 1}
    orbits = 0
    while todo:
        start = todo.pop()
        orbits += 1
        stack = [start]
        while stack:
            a, c = stack.pop()
            nbrs = [((a + c) % N, c), ((-a) % N, (-c) % N)]
            nbrs += [((x * a) % N, (pow(x, -1, N) * c) % N) for x in units if N > 1]
            for v in nbrs:
                if v in todo:
                    todo.remove(v)
                    stack.append(v)
    return orbits


# ---------------------------------------------------------------------------
# constant terms of E_k(chi1, chi2)

def _pair(chi1, chi2, k):
    chi1, chi2 = chi1.primitive(), chi2.primitive()
    if chi1.is_trivial():
        raise ValueError("chi1 must be nontrivial")
    check_parity(chi1, chi2, k)
    return chi1, chi2


def constant_term_classical(chi1, chi2, k, cusp, tau_sign=-1):
    """Classical closed form of the constant term of E_k(chi1, chi2) at ``cusp``.

    ``tau_sign`` selects the Gauss sum: -1 is the local convention of
    ``localsums`` (additive character e^(-2 pi i x)), under which this
    agrees with ``constant_term_adelic``; +1 is the classical Gauss sum,
    which differs by chi2(-1) and gives the q-expansion constant term.
    """
    chi1, chi2 = _pair(chi1, chi2, k)
    if cusp.witness is None:
        raise ValueError("missing witness")
    a, _, c, _ = cusp.witness
    N1, N2 = chi1.modulus, chi2.modulus
    if c % N1:
        return ZERO
    val = chi2(-c // N1) * chi1.inverse()(a)
    if not val:
        return ZERO
    mixed = chi1.inverse() * chi2
    ratio = dirichlet_gauss_sum(mixed, tau_sign) / dirichlet_gauss_sum(chi1.inverse(), tau_sign)
    scale = Fraction(N1, mixed.modulus) ** k
    L = partial_L(chi1 * chi2.inverse(), k, N1 * N2)
    return ratio * val * L * scale / 2


def local_constant_factor(chi1, chi2, k, p, g):
    """Value at g in SL_2(Z_p) of the intertwined new section M f at s = (1-k)/2.

    g = (A B; C D).  Writing C = p^j u, g = b gamma_j kappa with b upper
    triangular, gamma_j = (1 0; p^j 1), kappa in K_0(p^(e1+e2)).
    """
    A, B, C, D = g
    t1, t2 = LocalChar.from_dirichlet(chi1, p), LocalChar.from_dirichlet(chi2, p)
    N = t1.e + t2.e
    j = math.inf if C == 0 else factorint(abs(C)).get(p, 0)
    if j >= N:
        M = intertwining_constant(t1, t2, N, k).value
        return M * (t1 * t2).unit_value(D)
    u = Fraction(C, p ** j)
    w = Fraction(D) if j >= 1 else Fraction(1)
    det = Fraction(A * D - B * C)
    a_b = det / (u * w)
    M = intertwining_constant(t1, t2, j, k).value
    return t2.unit_value(a_b) * M * (t1 * t2).unit_value(w)


def constant_term_adelic(chi1, chi2, k, cusp):
    """Constant term at ``cusp`` assembled place by place.

    The adelic cusp attached to the witness gamma is gamma^-1; at each
    p | N the factor is the intertwined section at gamma^-1, and the
    normalization divides by the epsilon factors of chi2^-1 at p | N2.
    """
    chi1, chi2 = _pair(chi1, chi2, k)
    if cusp.witness is None:
        raise ValueError("missing witness")
    a, b, c, d = cusp.witness
    g = (d, -b, -c, a)
    N1, N2 = chi1.modulus, chi2.modulus
    N = N1 * N2
    val = ONE
    for p in factorint(N):
        val = val * local_constant_factor(chi1, chi2, k, p, g)
        if not val:
            return ZERO
    for p in factorint(N2):
        theta = LocalChar.from_dirichlet(chi2, p).inverse()
        val = val / epsilon_factor(theta, k)[1]
    L = partial_L(chi1 * chi2.inverse(), k, N)
    return val * L / 2


def eisenstein_constant_terms(chi1, chi2, k, level=None):
    """Constant terms of E_k(chi1, chi2) at every cusp of Gamma_1(level).

    These are the constant terms of E | gamma in the q-expansion
    normalization: the adelic product times chi2(-1).  The sign is the
    archimedean factor the finite-place product does not see; it is pinned
    by the floating-point oracle in the tests.
    """
    chi1, chi2 = _pair(chi1, chi2, k)
    N = chi1.modulus * chi2.modulus
    level = level or N
    if level % N:
        raise ValueError("level must be a multiple of cond(chi1) cond(chi2)")
    sign = chi2.parity
    return {s: constant_term_adelic(chi1, chi2, k, s) * sign for s in enumerate_cusps(level)}


# ---------------------------------------------------------------------------
# divisors on cusps and the Hecke action

@dataclass
class CuspDivisor:
    """Formal sum of cusps of Gamma_1(level) with coefficients mod p^m."""

    level: int
    p: int
    m: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        q = self.p ** self.m
        clean = {}
        for s, c in self.coeffs.items():
            if s.level != self.level:
                raise ValueError("cusp of a different level")
            c %= q
            if c:
                clean[s] = c
        self.coeffs = clean

    @property
    def modulus(self):
        return self.p ** self.m

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for s, c in other.coeffs.items():
            out[s] = out.get(s, 0) + c
        return CuspDivisor(self.level, self.p, self.m, out)

    def scale(self, c):
        return CuspDivisor(self.level, self.p, self.m, {s: c * v for s, v in self.coeffs.items()})

    def _check(self, other):
        if (self.level, self.p, self.m) != (other.level, other.p, other.m):
            raise ValueError("divisors live in different modules")

    def __eq__(self, other):
        return isinstance(other, CuspDivisor) and (self.level, self.p, self.m, self.coeffs) == (
            other.level, other.p, other.m, other.coeffs)

    def is_zero(self):
        return not self.coeffs

    def vector(self, cusps):
        return [self.coeffs.get(s, 0) for s in cusps]

    @classmethod
    def from_vector(cls, level, p, m, cusps, vec):
        return cls(level, p, m, {s: int(c) for s, c in zip(cusps, vec)})

    def to_json(self):
        return {"level": self.level, "p": self.p, "m": self.m,
                "coeffs": [{"cusp": s.label(), "a": s.a, "c": s.c, "coeff": c}
                           for s, c in sorted(self.coeffs.items(), key=lambda t: (t[0].c, t[0].a))]}


class CuspTable:
    """Cusps of Gamma_1(N) with fast reduction of arbitrary a/c."""

    def __init__(self, N):
        self.level = N
        self.cusps = enumerate_cusps(N)
        self.index = {s.key: i for i, s in enumerate(self.cusps)}

    def __len__(self):
        return len(self.cusps)

    def find(self, a, c):
        g = math.gcd(a, c)
        return self.index[cusp_key(a // g, c // g, self.level)]

    def find_signed(self, a, c):
        """(index, e) with (a, c)/gcd equivalent to e times the stored representative.

        Matters in odd weight: E|(-gamma) = -E|gamma.  At an irregular cusp
        both signs apply and e = 1 is returned.
        """
        g = math.gcd(a, c)
        a, c = a // g, c // g
        i = self.index[cusp_key(a, c, self.level)]
        s = self.cusps[i]
        return i, _orientation(a, c, self.level) * _orientation(s.a, s.c, self.level)


def _orientation(a, c, N):
    h = math.gcd(c, N)
    return 1 if (c % N, a % h) == cusp_key(a, c, N) else -1


def _coset_images(table, p, direction, cusps=None):
    """Columns of the coset pushforward at p as lists of target indices.

    T: a/c -> sum_u (a/c - u)/p, from right translation of the adelic cusp
    by (p u; 0 1) at p.  T*: right translation by the inverse right coset
    representatives, which reads a/c -> sum_u (p a)/(c - c_u p a) with
    c_u = -u p^(r-1) mod p^r and c_u = 0 mod N/p^r, r = v_p(N).
    """
    N = table.level
    r = factorint(N).get(p, 0)
    if r == 0:
        raise ValueError("the coset pushforward needs p | level")
    pr, rest = p ** r, N // p ** r
    out = []
    for s in (table.cusps if cusps is None else cusps):
        a, c = s.a, s.c
        if direction == "T":
            imgs = [table.find(a - u * c, p * c) for u in range(p)]
        elif direction == "T*":
            imgs = []
            for u in range(p):
                cu = _crt((-u * p ** (r - 1)) % pr, pr, 0, rest)
                imgs.append(table.find(p * a, c - cu * p * a))
        else:
            raise ValueError("direction is 'T' or 'T*'")
        out.append(imgs)
    return out


def _crt(r1, m1, r2, m2):
    return (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)) % (m1 * m2) if m2 > 1 else r1 % m1


def hecke_matrix(level, p, m, direction="T"):
    """Matrix of the coset pushforward on Z/p^m[cusps], acting on columns."""
    table = CuspTable(level)
    n = len(table)
    M = [[0] * n for _ in range(n)]
    for j, imgs in enumerate(_coset_images(table, p, direction)):
        for i in imgs:
            M[i][j] += 1
    return table, nmod_mat(n, n, [x for row in M for x in row], p ** m)


def hecke_on_cusps(D, p, direction="T"):
    """T(p) or T*(p) applied to a divisor, for p dividing the level."""
    table = CuspTable(D.level)
    out = {}
    for s, c in D.coeffs.items():
        for i in _coset_images(table, p, direction, [s])[0]:
            t = table.cusps[i]
            out[t] = out.get(t, 0) + c
    return CuspDivisor(D.level, D.p, D.m, out)


def d_bar(level, p):
    """Cusps a/c of Gamma_1(level) with p | c (the classes killed by the projector)."""
    return [s for s in enumerate_cusps(level) if s.c % p == 0]


def d_bold(level, p):
    """Cusps with v_p(c) < v_p(level) (the classes killed by the dual projector)."""
    r = factorint(level).get(p, 0)
    return [s for s in enumerate_cusps(level) if s.c % p ** r != 0]


class ProjectorError(RuntimeError):
    pass


def ordinary_projector_matrix(level, p, m, direction="T", budget=None):
    """e = lim T(p)^(n!) on Z/p^m[cusps], with the limit detected.

    A_n = A_(n-1)^n, so A_n = T^(n!); stop when A_n = A_(n-1).
    """
    table, T = hecke_matrix(level, p, m, direction)
    budget = budget if budget is not None else m + 64
    A = T
    for n in range(2, budget + 1):
        B = A ** n
        if B == A:
            return table, A, n
        A = B
    raise ProjectorError(f"T({p})^(n!) did not stabilize mod {p}^{m} within n <= {budget}")


def ordinary_projector_cusps(D, p, m, direction="T"):
    if (D.p, D.m) != (p, m):
        raise ValueError("divisor modulus does not match p^m")
    table, E, _ = ordinary_projector_matrix(D.level, p, m, direction)
    vec = D.vector(table.cusps)
    n = len(table)
    out = [sum(int(E[i, j]) * vec[j] for j in range(n)) for i in range(n)]
    return CuspDivisor.from_vector(D.level, p, m, table.cusps, out)


def projector_report(level, p, m, direction="T"):
    """Checks of the ordinary projector: kernel, rank, idempotence."""
    table, E, steps = ordinary_projector_matrix(level, p, m, direction)
    n = len(table)
    killed = d_bar(level, p) if direction == "T" else d_bold(level, p)
    kill_idx = [table.index[s.key] for s in killed]
    kills = all(int(E[i, j]) == 0 for j in kill_idx for i in range(n))
    Ep = nmod_mat(n, n, [int(x) % p for x in E.entries()], p)
    rank = Ep.rank()
    return {
        "level": level, "p": p, "m": m, "direction": direction,
        "cusps": n, "killed_classes": len(killed), "steps": steps,
        "kills_support": kills, "rank_mod_p": rank,
        "rank_ok": rank == n - len(killed), "idempotent": E * E == E,
    }


# ---------------------------------------------------------------------------
# the constant-term map

def c0_map(f, level):
    """Vector of constant terms of f at the cusps of Gamma_1(level).

    f.constant_terms is keyed by Cusp (or by cusp key); the key "*" gives
    a value shared by every cusp (0 for cusp forms).
    """
    out = {}
    for s in enumerate_cusps(level):
        ct = f.constant_terms
        if s in ct:
            out[s] = CycNum.coerce(ct[s])
        elif s.key in ct:
            out[s] = CycNum.coerce(ct[s.key])
        elif "*" in ct:
            out[s] = CycNum.coerce(ct["*"])
        else:
            raise ValueError(f"missing constant term at {s.label()}")
    return out


def _sigma(ell, N):
    """(x y; N ell) in SL_2(Z): lower right entry = ell mod N."""
    g, x, y = _xgcd(ell, N)
    # x ell + y N = 1  ->  (x, -y; N, ell)
    return (x, -y, N, ell)


def hecke_on_constant_terms(v, ell, k, level):
    """Constant terms of T(ell) f from those of f, for ell prime to level.

    T(ell) f = sum_j f[(1 j; 0 ell)] + f[sigma (ell 0; 0 1)] with
    f[alpha] = det^(k-1) (cz+d)^-k f(alpha z) and sigma in Gamma_0(level),
    lower right entry ell.  If alpha sends the cusp a/c to a'/c' with
    g = gcd(alpha (a, c)), the term contributes ell^-1 (e g)^k times the
    constant term at a'/c', where e = +-1 orients a'/c' against the stored
    representative.
    """
    if math.gcd(ell, level) != 1:
        raise ValueError("ell must be prime to the level")
    table = CuspTable(level)
    vals = [CycNum.coerce(v[s]) for s in table.cusps]
    sx, sy, sz, sw = _sigma(ell, level)
    out = {}
    for s in table.cusps:
        a, c = s.a, s.c
        pairs = [(a + j * c, ell * c) for j in range(ell)]
        A, Cc = ell * a, c
        pairs.append((sx * A + sy * Cc, sz * A + sw * Cc))
        acc = ZERO
        for x, y in pairs:
            g = math.gcd(x, y)
            i, e = table.find_signed(x, y)
            acc = acc + vals[i] * Fraction(e ** k * g ** k, ell)
        out[s] = acc
    return out


def eisenstein_basis(level, k, bound):
    """E_k(chi1, chi2) for primitive pairs with chi1 nontrivial and N1 N2 | level.

    Each series carries its constant terms at every cusp of Gamma_1(level)
    and the nebentypus induced to ``level``.
    """
    from .characters import primitive_chars
    from .eisenstein import eisenstein_qexp
    from .exactmath import divisors
    out = []
    for N1 in divisors(level):
        if N1 == 1:
            continue
        for N2 in divisors(level // N1):
            for chi1 in primitive_chars(N1):
                for chi2 in primitive_chars(N2):
                    if chi1.parity * chi2.parity != (-1) ** k:
                        continue
                    f = eisenstein_qexp(chi1, chi2, k, bound)
                    f.level = level
                    f.nebentypus = (chi1 * chi2).induce(level)
                    f.constant_terms.update(eisenstein_constant_terms(chi1, chi2, k, level))
                    out.append(f)
    return out


def _solve(rows, rhs):
    """Exact solution x of rows x = rhs over CycNum, or None if inconsistent.

    rows is a list of equations (one per q-coefficient), each a list of
    CycNum with one entry per unknown.
    """
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols, r = [], 0
    for col in range(n):
        pr = next((i for i in range(r, len(aug)) if aug[i][col]), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = aug[r][col].inverse()
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
    if any(row[-1] for row in aug[r:]):
        return None
    x = [ZERO] * n
    for i, col in enumerate(piv_cols):
        x[col] = aug[i][-1]
    return x


def span_coordinates(f, basis, bound=None):
    """Coordinates of f in the span of ``basis`` from q-coefficients 1..bound."""
    B = min([f.bound] + [g.bound for g in basis] + ([bound] if bound else []))
    rows = [[g.coeff(n) for g in basis] for n in range(1, B + 1)]
    x = _solve(rows, [f.coeff(n) for n in range(1, B + 1)])
    if x is None:
        raise ValueError("f is not in the span on the given window")
    return x


def check_c0_equivariance(level, k, ell, bound=None):
    """C0(T(ell) E) against the slash-weighted T(ell) on constant terms, per basis E.

    T(ell) E is computed on q-expansions and located in the span by linear
    algebra, so its constant terms come from the basis, not from the
    eigenvalue.  Returns a list of (label, ok).
    """
    bound = bound or 30 * ell
    basis = eisenstein_basis(level, k, bound)
    c0s = [c0_map(g, level) for g in basis]
    out = []
    for g, v in zip(basis, c0s):
        x = span_coordinates(hecke_T(g, ell), basis)
        lhs = {s: sum((xi * c[s] for xi, c in zip(x, c0s) if xi), ZERO) for s in v}
        rhs = hecke_on_constant_terms(v, ell, k, level)
        out.append((g.label, all(lhs[s] == rhs[s] for s in v)))
    return out
