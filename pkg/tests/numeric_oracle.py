"""Floating-point constant terms of E_k | gamma, used as an independent referee.

Nothing here goes through the exact q-expansion or L-value code: the
coefficients are divisor sums in complex floats and the constant at
infinity is solved from the modularity of E under (1 0; N 1).
"""

import math

import numpy as np


def _char_array(chi, count):
    table = np.array([complex(chi(n % chi.modulus).to_complex()) for n in range(chi.modulus)])
    return table[np.arange(count) % chi.modulus]


def eisenstein_numeric(chi1, chi2, k, count):
    """Coefficients a_1..a_{count-1} of E_k(chi1, chi2) (a_0 left as 0)."""
    x1, x2 = _char_array(chi1, count), _char_array(chi2, count)
    a = np.zeros(count, dtype=complex)
    for d in range(1, count):
        m = np.arange(d, count, d)
        a[m] += x1[d] * float(d) ** (k - 1) * x2[m // d]
    return a


def _series(a, z):
    q = np.exp(2j * math.pi * np.asarray(z, dtype=complex))
    out = np.zeros(q.shape, dtype=complex)
    for c in a[::-1]:
        out = out * q + c
    return out


def solve_constant(a, k, N):
    """a_0 from E(gamma z) (N z + 1)^-k = E(z), gamma = (1 0; N 1)."""
    z = -1 / N + 0.7j / N
    j = N * z + 1
    gz = z / j
    s, sg = _series(a, z), _series(a, gz)
    return complex((s - sg * j ** (-k)) / (j ** (-k) - 1))


def constant_term_numeric(a, k, witness, level, samples=None):
    """Average of (c z + d)^-k E(gamma z) over one period of length ``level``.

    a[n] are the q-expansion coefficients, a[0] the constant at infinity.
    Equally spaced samples give the constant Fourier mode up to aliasing
    of mode ``samples``, which is below 1e-15 for the defaults.
    """
    a_, b, c, d = witness
    if c == 0:
        return a[0] * (1 if d == 1 else (-1) ** k)
    samples = samples or max(64, 8 * level)
    y = level / 2
    xs = -d / c - level / 2 + level * np.arange(samples) / samples
    z = xs + 1j * y
    gz = (a_ * z + b) / (c * z + d)
    vals = _series(a, gz) * (c * z + d) ** (-k)
    return complex(vals.mean())


def terms_needed(witness, level, tol=1e-14):
    _, _, c, _ = witness
    if c == 0:
        return 2
    y = level / 2
    im = y / ((c * level / 2) ** 2 + (c * y) ** 2)
    return int(-math.log(tol) / (2 * math.pi * im)) + 10
