"""Numerical special functions for the transcendental model families.

Complex dilogarithm / trilogarithm, Jacobi theta-1 with x-derivatives up to
order four, the Dedekind eta logarithm, and elliptic polylogarithms.  All
functions work in double precision; series are truncated at the 1e-17..1e-18
level so downstream residual checks can resolve 1e-10.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

TWO_PI_I = 2j * math.pi
_ZETA2 = math.pi ** 2 / 6.0
_ZETA3 = 1.2020569031595942854


def _bernoulli_table(n):
    """B_0..B_n as exact fractions (B_1 = -1/2 convention)."""
    table = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * table[k]
        table.append(-acc / (m + 1))
    return table


_BERN = _bernoulli_table(80)

# Only B_0..B_4 appear in the elliptic-polylog corrections.
BERNOULLI = [Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30)]


def _zeta_int(k):
    """Riemann zeta at an integer k <= 3, from Bernoulli numbers for k <= 0."""
    if k == 3:
        return _ZETA3
    if k == 2:
        return _ZETA2
    if k == 1:
        raise ValueError("zeta(1) requested")
    if k == 0:
        return -0.5
    m = 1 - k  # B_m = 0 for odd m >= 3 covers the trivial zeros
    return -float(_BERN[m]) / m


def _li_series(n, z):
    total = 0j
    zk = complex(z)
    k = 1
    while True:
        term = zk / k ** n
        total += term
        if abs(term) < 1e-18 * (1.0 + abs(total)):
            return total
        k += 1
        zk *= z
        if k > 300:  # |z| <= 0.55 needs far fewer
            return total


def _li_log_expansion(n, z):
    # Li_n(e^w) = sum_{j>=0, j != n-1} zeta(n-j) w^j / j!
    #           + w^{n-1}/(n-1)! * (H_{n-1} - log(-w)),  |w| < 2*pi.
    w = cmath.log(z)
    if w == 0:
        return complex(_zeta_int(n))
    hs = sum(1.0 / j for j in range(1, n))
    total = w ** (n - 1) / math.factorial(n - 1) * (hs - cmath.log(-w))
    # successive non-zero terms shrink by ~(|w|/2pi)^2; bound the tail by that
    ratio = (abs(w) / (2.0 * math.pi)) ** 2
    wj = 1.0 + 0j
    last_nonzero = math.inf
    for j in range(0, 60):
        if j != n - 1:
            term = _zeta_int(n - j) * wj
            total += term
            if term != 0:
                last_nonzero = abs(term)
            if j > n + 2 and last_nonzero * ratio / (1.0 - ratio) < 1e-18 * (1.0 + abs(total)):
                break
        wj *= w / (j + 1)
    return total


def li(n, z):
    """Polylogarithm Li_n(z), n in {0,1,2,3}, principal branch.

    |z| <= 1/2 uses the defining series; large |z| the inversion formula;
    the annulus in between the log-of-argument expansion around z = 1.
    """
    z = complex(z)
    if n == 0:
        return z / (1.0 - z)
    if n == 1:
        return -cmath.log(1.0 - z)
    if n not in (2, 3):
        raise ValueError("polylog order %r not supported" % (n,))
    az = abs(z)
    if az == 0.0:
        return 0j
    if az <= 0.5:
        return _li_series(n, z)
    if az <= 1.9:
        return _li_log_expansion(n, z)
    # inversion to |1/z| < 0.53
    lz = cmath.log(-z)
    inner = li(n, 1.0 / z)
    if n == 2:
        return -inner - _ZETA2 - 0.5 * lz * lz
    return inner - lz ** 3 / 6.0 - _ZETA2 * lz


@dataclass(frozen=True)
class ThetaContext:
    """Fixed modular parameter for theta-series evaluation."""
    tau: complex
    q: complex
    nmax: int


def theta_context(tau):
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("theta context requires Im tau > 0, got %r" % (tau,))
    q = cmath.exp(1j * math.pi * tau)
    # |q|^{(N+1/2)^2} < 1e-18
    n = 1
    while abs(q) ** ((n + 0.5) ** 2) >= 1e-18:
        n += 1
    return ThetaContext(tau, q, n)


_TRIG = (cmath.sin, cmath.cos, lambda v: -cmath.sin(v), lambda v: -cmath.cos(v))


def theta1(k, x, ctx):
    """k-th x-derivative (0 <= k <= 4) of Jacobi theta-1 at x, term-wise."""
    if not 0 <= k <= 4:
        raise ValueError("theta1 derivative order out of range: %r" % (k,))
    x = complex(x)
    total = 0j
    grow = math.exp(math.pi * abs(x.imag))
    n = 0
    while True:
        amp = 2.0 * (-1) ** n * ctx.q ** ((n + 0.5) ** 2)
        m = (2 * n + 1) * math.pi
        term = amp * m ** k * _TRIG[k % 4](m * x)
        total += term
        bound = 2.0 * abs(ctx.q) ** ((n + 0.5) ** 2) * m ** k * grow ** (2 * n + 1)
        if n >= ctx.nmax and bound < 1e-18 * (1.0 + abs(total)):
            return total
        n += 1
        if n > ctx.nmax + 80:
            return total


def theta1_dtau(x, ctx):
    """Term-wise tau-derivative of theta-1 (used by the heat-equation check)."""
    x = complex(x)
    total = 0j
    n = 0
    while True:
        amp = 2.0 * (-1) ** n * ctx.q ** ((n + 0.5) ** 2)
        term = 1j * math.pi * (n + 0.5) ** 2 * amp * cmath.sin((2 * n + 1) * math.pi * x)
        total += term
        if n >= ctx.nmax + 10:
            return total
        n += 1


def dedekind_eta_log(tau):
    """log eta(tau) = i*pi*tau/12 + sum log(1 - q^{2n}), q = e^{i pi tau}."""
    return _eta_log_term(0, tau)


def dedekind_eta_log_deriv(order, tau):
    """Term-wise tau-derivative of log eta, order 1 or 2."""
    if order not in (1, 2):
        raise ValueError("eta-log derivative order %r not supported" % (order,))
    return _eta_log_term(order, tau)


def _eta_log_term(order, tau):
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("Dedekind eta requires Im tau > 0")
    q2 = cmath.exp(TWO_PI_I * tau)
    total = {0: 1j * math.pi * tau / 12.0, 1: 1j * math.pi / 12.0, 2: 0j}[order]
    q2n = 1.0 + 0j
    n = 1
    while True:
        q2n *= q2
        if order == 0:
            term = cmath.log(1.0 - q2n)
        elif order == 1:
            term = -TWO_PI_I * n * q2n / (1.0 - q2n)
        else:
            term = -(TWO_PI_I * n) ** 2 * q2n / (1.0 - q2n) ** 2
        total += term
        if abs(q2n) * (1 + n) ** 2 < 1e-18 * (1.0 + abs(total)):
            return total
        n += 1
        if n > 4000:
            return total


def _chi_poly_dtau(n, m, u, tau):
    """m-th tau-derivative of the Bernoulli correction chi_n(u; tau)."""
    total = 0j
    for k in range(m, n + 1):
        coeff = float(_BERN[k + 1]) / (math.factorial(n - k) * math.factorial(k + 1))
        fall = math.factorial(k) // math.factorial(k - m)
        total += coeff * fall * u ** (n - k) * tau ** (k - m)
    total *= TWO_PI_I ** n
    if m == 0:
        total += (-1) ** (n - 1) * float(_BERN[n]) / (2.0 * math.factorial(n))
    return total


def elliptic_li(n, u, ctx, dtau=0):
    """Elliptic polylogarithm of order n (0..3), optionally tau-differentiated.

    Implements the lattice q-series
        sum_{k>=0} Li_n(e^{2 pi i (u + k tau)})
      + (-1)^{n-1} sum_{k>=1} Li_n(e^{-2 pi i (u - k tau)})  - chi_n(u; tau),
    with each polylog term evaluated on its analytic continuation, so no
    re-indexing of u into the fundamental strip is needed: terms with argument
    modulus above one are handled inside li() by the inversion formula.
    Tau-derivatives act term-wise: each application multiplies term k by
    2*pi*i*k and lowers the polylog order by one.
    """
    if not 0 <= n <= 3:
        raise ValueError("elliptic polylog order out of range: %r" % (n,))
    if dtau < 0 or n - dtau < 0:
        raise ValueError("tau-derivative order %r too high for order %r" % (dtau, n))
    u = complex(u)
    tau = ctx.tau
    norder = n - dtau
    sign = (-1) ** (n - 1)
    total = 0j
    k = 0
    while True:
        zp = cmath.exp(TWO_PI_I * (u + k * tau))
        if k > 0 or dtau == 0:
            weight = (TWO_PI_I * k) ** dtau if dtau else 1.0
            total += weight * li(norder, zp)
        mag = abs(zp)
        if k > 0:
            zm = cmath.exp(-TWO_PI_I * (u - k * tau))
            weight = (TWO_PI_I * k) ** dtau if dtau else 1.0
            total += sign * weight * li(norder, zm)
            mag = max(mag, abs(zm))
        if k > 1 and mag < 1.0 and mag * (2 * math.pi * k) ** dtau < 1e-17 * (1.0 + abs(total)):
            break
        k += 1
        if k > 600:
            break
    return total - _chi_poly_dtau(n, dtau, u, tau)


def elliptic_li_du_constant(n):
    """Constant in d/du Lam_n = 2*pi*i*Lam_{n-1} + pi*i^{2n+1}*B_{n-1}/(n-1)!."""
    if n < 1:
        raise ValueError("u-derivative lowers below order zero")
    return math.pi * 1j ** (2 * n + 1) * float(_BERN[n - 1]) / math.factorial(n - 1)
