"""Lambda-adic Eisenstein series, the Kubota-Leopoldt power series and A(chi1, chi2).

Lambda = Z_p[[T]] is represented by (Z/p^m)[T]/(T^n) with both parameters
recorded in every result.  u = 1 + p throughout; a prime-to-p integer a
factors as a = omega(a) u^s(a) with omega the Teichmuller character.
Character values land in Z/p^m through Teichmuller lifts (see ResidueRing).

Specialization at weight k (and trivial wild character) is T -> u^(k-2) - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .characters import DirChar, teichmuller_char
from .eisenstein import QExpansion, bernoulli_L, eisenstein_qexp_stabilized
from .exactmath import (
    ONE,
    ZERO,
    CycNum,
    PadicSeries,
    ResidueRing,
    _vp_factorial,
    binomial_power,
    divisors,
    euler_phi,
    factorint,
    ring_needed_for,
    series_eval,
    teichmuller,
)


# ---------------------------------------------------------------------------
# weight exponents

@dataclass(frozen=True)
class WeightExponent:
    a: int
    p: int
    precision: int  # u^s = <a> holds mod p^precision
    s: int  # known mod p^(precision - 1)
    teich: int  # omega(a) mod p^precision

    @property
    def u(self):
        return 1 + self.p


def weight_exponent(a, p, mprime):
    """s(a) with (1+p)^s(a) = <a> mod p^mprime, by p-adic digit extraction."""
    if a % p == 0:
        raise ValueError(f"{a} is divisible by {p}")
    if p == 2:
        raise ValueError("p must be odd")
    M = p ** mprime
    w = teichmuller(a, p, mprime)
    x = a * pow(w, -1, M) % M
    u = 1 + p
    s = 0
    for i in range(mprime - 1):
        y = x * pow(pow(u, s, M), -1, M) % M
        # y = 1 mod p^(i+1); u^(p^i) = 1 + p^(i+1) mod p^(i+2)
        d = (y - 1) // p ** (i + 1) % p
        s += d * p ** i
    return WeightExponent(a, p, mprime, s, w)


def _exp_precision(p, m, n):
    return m + _vp_factorial(n - 1, p) + 1


def _one_plus_T_power(a, p, ring, n, sign=1):
    """(1+T)^(sign s(a)) in ring[T]/(T^n)."""
    prec = _exp_precision(p, ring.m, n)
    s = weight_exponent(a, p, prec + 1).s
    return binomial_power(sign * s, p, ring.m, n, sprec=prec, ring=ring)


def specialization_point(p, k):
    return (1 + p) ** (k - 2) - 1


def ring_valuation(ring, x):
    """min over coordinates of v_p, capped at m."""
    vals = []
    for c in x:
        c %= ring.mod
        if c:
            v = 0
            while c % ring.p == 0:
                c //= ring.p
                v += 1
            vals.append(v)
    return min(vals) if vals else ring.m


# ---------------------------------------------------------------------------
# Kubota-Leopoldt power series

@dataclass
class IwasawaElement:
    series: PadicSeries
    role: str
    char: DirChar = None
    info: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.series.p

    def eval_int(self, t0):
        return series_eval(self.series, t0)

    def to_json(self):
        out = {"role": self.role, "series": self.series.to_json()}
        if self.char is not None:
            out["char"] = self.char.label()
        out.update(self.info)
        return out


def _check_even(chi):
    if chi.parity != 1:
        raise ValueError("the p-adic L-function needs an even character")


def lp_value(chi, p, k):
    """L_p(1-k, chi) = L(1-k, chi omega^-k)(1 - chi omega^-k(p) p^(k-1)), exact."""
    psi = chi * teichmuller_char(p, -k)
    return bernoulli_L(psi, k, p).value


def _H_value(chi, p, t):
    return t if chi.is_trivial() else 1


def _newton(nodes, values):
    """Coefficients (low to high) of the interpolating polynomial, exact."""
    N = len(nodes)
    dd = list(values)
    coef = [dd[0]]
    for level in range(1, N):
        dd = [(dd[i + 1] - dd[i]) / (nodes[i + level] - nodes[i]) for i in range(N - level)]
        coef.append(dd[0])
    # Newton form to monomial form: Horner from the top
    poly = [coef[-1]]
    for j in range(N - 2, -1, -1):
        t = nodes[j]
        nxt = [ZERO] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * t
        nxt[0] = nxt[0] + coef[j]
        poly = nxt
    return poly


def _interpolate(weights, value_at, p, m, n, ring, shift=0):
    """Series F with F(u^(k - shift) - 1) = value_at(k) at the given weights."""
    u = 1 + p
    nodes = [u ** (k - shift) - 1 for k in weights]
    vals = [CycNum.coerce(value_at(k)) for k in weights]
    poly = _newton(nodes, vals)
    coeffs = []
    for c in poly[:n]:
        try:
            coeffs.append(ring.from_cyc(c))
        except ValueError as exc:
            raise ArithmeticError(f"interpolation not integral at nodes {weights}") from exc
    return PadicSeries(ring, n, coeffs)


def _ring_for(p, m, chars, extra=1):
    orders = [c.order for c in chars] + [p - 1]
    r = ring_needed_for(p, orders)
    return ResidueRing(p, m, math.lcm(r, extra))


def default_nodes(p, m, n, k0=2):
    """n + m weights k0 + (p-1) i: enough for coefficients below T^n mod p^m."""
    return [k0 + (p - 1) * i for i in range(n + m)]


def kubota_leopoldt(chi, p, m, n, nodes=None):
    """G_chi with G_chi(u^k - 1) = H_chi(u^k - 1) L_p(1-k, chi), mod (p^m, T^n).

    Newton interpolation through u^k - 1 at ``nodes`` (default n + m
    weights in one class mod p-1) from exact Bernoulli values.  With N
    nodes the interpolating polynomial agrees with G_chi coefficientwise
    to p^(N-j) in degree j, so N >= n + m suffices.
    """
    chi = chi.primitive()
    _check_even(chi)
    if p == 2:
        raise ValueError("p must be odd")
    nodes = nodes or default_nodes(p, m, n)
    if len(nodes) < n + m:
        raise ValueError(f"need at least n + m = {n + m} nodes")
    ring = _ring_for(p, m, [chi])
    u = 1 + p
    series = _interpolate(nodes, lambda k: _H_value(chi, p, u ** k - 1) * lp_value(chi, p, k),
                          p, m, n, ring)
    return IwasawaElement(series, "G", chi, {"p": p, "m": m, "n": n, "nodes": list(nodes)})


def kl_H(chi, p, m, n):
    ring = _ring_for(p, m, [chi])
    if chi.primitive().is_trivial():
        return IwasawaElement(PadicSeries.T(ring, n), "H", chi)
    return IwasawaElement(PadicSeries.constant(ring, n, ring.one), "H", chi)


def kl_residual(G, k):
    """G(u^k - 1) - H(u^k - 1) L_p(1-k, chi) in the ring of G."""
    chi, p = G.char, G.p
    ring = G.series.ring
    t = (1 + p) ** k - 1
    expect = ring.from_cyc(_H_value(chi, p, t) * lp_value(chi, p, k))
    return ring.sub(G.eval_int(t), expect)


def G_hat(chi, p, m, n, nodes=None, ring=None):
    """G_{chi omega^2}(u^2(1+T) - 1), interpolated directly in the shifted variable.

    At T = u^(k-2) - 1 its value is L_p(1-k, chi omega^2)
    = L(1-k, chi omega^(2-k)) with the Euler factor at p removed.
    """
    chi = chi.primitive()
    twist = chi * teichmuller_char(p, 2)
    if twist.is_trivial():
        raise ValueError("chi omega^2 is trivial: H-hat is not a unit (excluded pair)")
    _check_even(twist)
    nodes = nodes or default_nodes(p, m, n)
    ring = ring or _ring_for(p, m, [chi])
    series = _interpolate(nodes, lambda k: lp_value(twist, p, k), p, m, n, ring, shift=2)
    return IwasawaElement(series, "G_hat", chi, {"p": p, "m": m, "n": n, "nodes": list(nodes)})


# ---------------------------------------------------------------------------
# Lambda-adic Eisenstein series

@dataclass
class LambdaQExpansion:
    chars: tuple
    p: int
    m: int
    n: int
    level: int
    bound: int
    coeffs: dict
    constant_term: PadicSeries

    @property
    def ring(self):
        return self.constant_term.ring

    def coeff(self, index):
        return self.coeffs[index]

    def to_json(self):
        return {
            "chars": [c.label() for c in self.chars], "p": self.p, "m": self.m, "n": self.n,
            "level": self.level, "bound": self.bound,
            "constant_term": self.constant_term.to_json(),
            "coeffs": {i: c.to_json()["coeffs"] for i, c in self.coeffs.items()},
        }


def _euler_factors(chi, p, level, ring, n, form):
    """prod over q | level, q != p, q not dividing cond(chi) of the Euler factor.

    form "displayed": 1 - chi(q)(1+T)^(-s(q)) q^(-2);
    form "constant_term": 1 - chi(q) q (1+T)^(s(q)), the factor that
    removes q from L(1-k, chi omega^(2-k)) after specialization.
    """
    one = PadicSeries.constant(ring, n, ring.one)
    out = one
    for q in factorint(level):
        if q == p or chi.modulus % q == 0:
            continue
        cq = ring.from_cyc(chi(q))
        if form == "displayed":
            term = _one_plus_T_power(q, p, ring, n, sign=-1).scale(ring.mul(cq, ring.scalar(Fraction(1, q * q))))
        elif form == "constant_term":
            term = _one_plus_T_power(q, p, ring, n).scale(ring.mul(cq, ring.scalar(q)))
        else:
            raise ValueError("form is 'displayed' or 'constant_term'")
        out = out * (one - term)
    return out


def lambda_eisenstein(chi1, chi2, p, m, n, B, level=None, nodes=None):
    """E(chi1, chi2) in Lambda[[q]] truncated at q^B.

    C(index) = sum over a | index prime to level p of
    chi1(a)(1+T)^s(a) chi2(index/a) a.  ``level`` defaults to cond(chi1);
    a larger level also drops the divisors a sharing a prime with it.
    Constant term: (1/2) (Euler factors at q | level) G-hat / H-hat when
    chi2 is trivial, else 0.  ``nodes`` is passed to G_hat.
    """
    chi1, chi2 = chi1.primitive(), chi2.primitive()
    if chi2.modulus % p == 0:
        raise ValueError("cond(chi2) must be prime to p")
    if (chi1 * chi2).parity != 1:
        raise ValueError("chi1 chi2 must be even")
    level = level or chi1.modulus
    if level % chi1.modulus:
        raise ValueError("level must be a multiple of cond(chi1)")
    chi = chi1 * chi2.inverse()
    if (chi * teichmuller_char(p, 2)).is_trivial():
        raise ValueError("(chi1, chi2) = (omega^-2, 1) up to equivalence: the constant term has a pole")
    ring = _ring_for(p, m, [chi1, chi2])
    bad = level * p
    cache = {}

    def chibar(a):
        hit = cache.get(a)
        if hit is None:
            v = chi1(a)
            hit = _one_plus_T_power(a, p, ring, n).scale(ring.from_cyc(v * a))
            cache[a] = hit
        return hit

    zero = PadicSeries(ring, n, [])
    coeffs = {}
    for idx in range(1, B + 1):
        acc = zero
        for a in divisors(idx):
            if math.gcd(a, bad) != 1:
                continue
            w = chi2(idx // a)
            if not w:
                continue
            acc = acc + chibar(a).scale(ring.from_cyc(w))
        coeffs[idx] = acc
    if chi2.is_trivial():
        G = G_hat(chi, p, m, n, nodes, ring=ring).series
        const = (_euler_factors(chi, p, level, ring, n, "constant_term") * G).scale(ring.scalar(Fraction(1, 2)))
    else:
        const = zero
    return LambdaQExpansion((chi1, chi2), p, m, n, level, B, coeffs, const)


def specialize(F, k, zeta_order=1):
    """Coefficientwise evaluation at T = zeta u^(k-2) - 1.

    zeta_order = p^r selects zeta = x in (Z/p^m)[x]/Phi_(p^r); the ring is
    enlarged accordingly.  Exactness needs n >= m phi(p^r) since zeta u^(k-2) - 1
    only has valuation 1/phi(p^r).  Returns (ring, {index: value}, constant).
    """
    p, m, n = F.p, F.m, F.n
    t = specialization_point(p, k)
    if zeta_order == 1:
        ring = F.ring
        vals = {i: series_eval(c, t) for i, c in F.coeffs.items()}
        return ring, vals, series_eval(F.constant_term, t)
    r = factorint(zeta_order)
    if list(r) != [p]:
        raise ValueError("zeta must have p-power order")
    if n < m * euler_phi(zeta_order):
        raise ValueError(f"extension precision insufficient: need n >= {m * euler_phi(zeta_order)}")
    base = F.ring
    ring = ResidueRing(p, m, math.lcm(base.r, zeta_order))
    zeta = ring._zeta_image(zeta_order, 1)
    t0 = ring.sub(ring.smul((1 + p) ** (k - 2) % ring.mod, zeta), ring.one)

    def lift(f):
        if base.dim == 1:
            return PadicSeries(ring, f.n, [ring.scalar(c[0]) for c in f.coeffs])
        raise ValueError("wild specialization implemented for Z/p^m coefficient rings")

    vals = {i: series_eval(lift(c), t0) for i, c in F.coeffs.items()}
    return ring, vals, series_eval(lift(F.constant_term), t0)


def wild_character(p, r):
    """rho with rho(a) = zeta_(p^r)^(s(a)), conductor p^(r+1)."""
    q = p ** (r + 1)
    return DirChar.from_function(q, p ** r, lambda a: weight_exponent(a, p, r + 1).s)


def specialization_target(chi1, chi2, p, k, B, zeta_order=1, level=None):
    """The classical series v_{k,zeta}(E(chi1, chi2)) should reduce to."""
    psi = chi1 * teichmuller_char(p, 2 - k)
    if zeta_order > 1:
        psi = psi * wild_character(p, factorint(zeta_order)[p])
    f = eisenstein_qexp_stabilized(psi, chi2, k, B, p)
    level = level or chi1.modulus
    extra = [q for q in factorint(level) if q != p and psi.modulus % q]
    if not extra:
        return f
    fn = f.coeff

    def coeff(idx):
        # drop divisors a that share a prime with the level
        total = ZERO
        for a in divisors(idx):
            if math.gcd(a, level * p) != 1:
                continue
            w = chi2(idx // a)
            if w:
                total = total + psi(a) * w * Fraction(a) ** (k - 1)
        return total
    return QExpansion(k, f.level, B, coeff, f.nebentypus, f.chars, {}, f.label + f"[level {level}]")


def check_specialization(chi1, chi2, p, m, n, B, k, zeta_order=1, F=None):
    """Count of coefficient mismatches between v_{k,zeta}(E) and the classical target."""
    F = F or lambda_eisenstein(chi1, chi2, p, m, n, B)
    ring, vals, const = specialize(F, k, zeta_order)
    target = specialization_target(chi1, chi2, p, k, B, zeta_order, F.level)
    bad = [i for i in range(1, B + 1) if vals[i] != ring.from_cyc(target.coeff(i))]
    const_ok = True
    if zeta_order == 1 and chi2.primitive().is_trivial():
        psi = chi1.primitive() * teichmuller_char(p, 2 - k)
        want = bernoulli_L(psi, k, p * F.level).value / 2
        const_ok = const == ring.from_cyc(want)
    return bad, const_ok


# ---------------------------------------------------------------------------
# A(chi1, chi2) and congruence modules

def eisenstein_A(chi1, chi2, p, m, n, level=None, form="displayed", nodes=None):
    """A(chi1, chi2) = (Euler factors at q | level) * G-hat_{chi1 chi2^-1}.

    ``form`` picks the Euler factor (see _euler_factors).
    """
    chi1, chi2 = chi1.primitive(), chi2.primitive()
    chi = chi1 * chi2.inverse()
    level = level or chi1.modulus * chi2.modulus
    G = G_hat(chi, p, m, n, nodes)
    ring = G.series.ring
    series = _euler_factors(chi, p, level, ring, n, form) * G.series
    return IwasawaElement(series, "A", chi, {"p": p, "m": m, "n": n, "level": level, "form": form})


def fiber_valuation(A, k):
    """ord_p of A at T = u^(k-2) - 1, capped at the working precision."""
    ring = A.series.ring
    return ring_valuation(ring, A.eval_int(specialization_point(A.p, k)))


def congruence_module_order(E, partner, k, A=None):
    """Fiber-k report on the Eisenstein congruence.

    (i) t = ord_p of A at the fiber, (ii) the largest j <= m with
    partner = v_k(E) mod p^j on every coefficient of the common window,
    (iii) whether t <= j.
    """
    p, m = E.p, E.m
    chi1, chi2 = E.chars
    A = A or eisenstein_A(chi1, chi2, p, m, E.n, E.level)
    t = fiber_valuation(A, k)
    ring, vals, _ = specialize(E, k)
    B = min(E.bound, partner.bound)
    depth = m
    for i in range(1, B + 1):
        diff = ring.sub(vals[i], ring.from_cyc(partner.coeff(i)))
        depth = min(depth, ring_valuation(ring, diff))
        if depth == 0:
            break
    return {
        "p": p, "m": m, "n": E.n, "fiber_weight": k, "level": E.level,
        "chars": [c.label() for c in E.chars], "partner": partner.label, "window": B,
        "A_valuation": t, "index": p ** t, "congruence_depth": depth,
        "consistent": t <= depth,
        "note": "no congruence required" if t == 0 else "",
    }
