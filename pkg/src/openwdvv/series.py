"""Truncated Laurent-series arithmetic in one variable.

A series lives in a local parameter t: t = var - center at a finite center,
t = 1/var at infinity.  coeffs[i] is the coefficient of t**(n0 + i) and
`order` is the first exponent NOT represented, so arithmetic never claims
coefficients beyond what its inputs support.
"""

import cmath
import math
from fractions import Fraction

from . import expr as ex

INFINITY = float("inf")


class EssentialSingularityError(ValueError):
    """The expression cannot be expanded by the supported rules."""


class SeriesError(ValueError):
    pass


class LaurentSeries:
    def __init__(self, var, center, n0, coeffs, order):
        self.var = var
        self.center = center
        self.n0 = int(n0)
        self.coeffs = list(coeffs)
        self.order = int(order)
        self._trim()

    def _trim(self):
        while self.coeffs and self.coeffs[0] == 0:
            self.coeffs.pop(0)
            self.n0 += 1
        del self.coeffs[max(0, self.order - self.n0):]
        if not self.coeffs:
            self.n0 = self.order

    def copy(self):
        return LaurentSeries(self.var, self.center, self.n0, self.coeffs, self.order)

    def is_zero(self):
        return not self.coeffs

    def coefficient(self, k):
        """Coefficient of t**k; raises if k is at or beyond truncation."""
        if k >= self.order:
            raise SeriesError("coefficient %d beyond truncation order %d" % (k, self.order))
        i = k - self.n0
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0j

    def valuation(self):
        return self.n0 if self.coeffs else None

    def _same_frame(self, other):
        if self.var != other.var or self.center != other.center:
            raise SeriesError("series in different charts")

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _const_like(self, other)
        self._same_frame(other)
        order = min(self.order, other.order)
        n0 = min(self.n0 if self.coeffs else order, other.n0 if other.coeffs else order)
        coeffs = [0j] * max(0, order - n0)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                k = s.n0 + i
                if k < order:
                    coeffs[k - n0] += c
        return LaurentSeries(self.var, self.center, n0, coeffs, order)

    def __radd__(self, other):
        return self + other

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _const_like(self, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LaurentSeries(self.var, self.center, self.n0, [-c for c in self.coeffs], self.order)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.var, self.center, self.n0,
                                 [c * other for c in self.coeffs], self.order)
        self._same_frame(other)
        if self.is_zero() or other.is_zero():
            order = min(self.order + (other.n0 if other.coeffs else 0),
                        other.order + (self.n0 if self.coeffs else 0))
            return _zero_like(self, order)
        order = min(self.n0 + other.order, other.n0 + self.order)
        n0 = self.n0 + other.n0
        coeffs = [0j] * max(0, order - n0)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                k = n0 + i + j
                if k < order:
                    coeffs[k - n0] += a * b
        return LaurentSeries(self.var, self.center, n0, coeffs, order)

    def __rmul__(self, other):
        return self * other

    def drop_noise(self, rel=1e-11):
        """Zero out leading coefficients that are numerically negligible.

        Expansions centered at numerically computed roots carry O(1e-15)
        leftovers below the true valuation; valuation-sensitive operations
        (inverse, log, fractional powers) call this first.
        """
        scale = max((abs(c) for c in self.coeffs), default=0.0)
        coeffs = list(self.coeffs)
        for i, c in enumerate(coeffs):
            if abs(c) > rel * scale:
                break
            coeffs[i] = 0j
        return LaurentSeries(self.var, self.center, self.n0, coeffs, self.order)

    def _unit_part(self):
        """(lead, h, length): self = lead * t^n0 * h(t) with h[0] = 1, h known
        on the full window up to truncation (trailing zeros made explicit)."""
        if self.is_zero() or self.coeffs[0] == 0:
            raise SeriesError("need a nonzero leading coefficient")
        lead = self.coeffs[0]
        length = self.order - self.n0
        h = [self.coeffs[i] / lead if i < len(self.coeffs) else 0j
             for i in range(length)]
        return lead, h, length

    def inverse(self):
        cleaned = self.drop_noise()
        lead, h, length = cleaned._unit_part()
        inv = _ps_inv(h, length)
        return LaurentSeries(self.var, self.center, -cleaned.n0,
                             [c / lead for c in inv], -cleaned.n0 + length)

    def __truediv__(self, other):
        if not isinstance(other, LaurentSeries):
            return self * (1.0 / other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        n = int(n)
        if n == 0:
            return _const_like(self, 1.0)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def fractional_power(self, q):
        """Principal branch (c t^v (1+h))^q; q*v must be an integer."""
        q = Fraction(q)
        if self.is_zero():
            raise SeriesError("fractional power of zero series")
        v = self.n0
        if (q * v).denominator != 1:
            raise SeriesError("fractional power would produce non-integer exponents")
        lead, h, length = self._unit_part()
        out = _ps_binomial(h, q, length)
        scale = cmath.exp(float(q) * cmath.log(lead))
        n0 = int(q * v)
        return LaurentSeries(self.var, self.center, n0,
                             [scale * c for c in out], n0 + length)

    def exp(self):
        if self.coeffs and self.n0 < 0:
            raise EssentialSingularityError("exp of a series with a pole")
        c0 = self.coefficient(0) if self.order > 0 else 0j
        length = self.order
        u = [0j] * length
        for i, c in enumerate(self.coeffs):
            k = self.n0 + i
            if 1 <= k < length:
                u[k] = c
        out = _ps_exp(u, length)
        scale = cmath.exp(c0)
        return LaurentSeries(self.var, self.center, 0, [scale * c for c in out], length)

    def log(self):
        if self.is_zero() or self.n0 != 0:
            raise SeriesError("log needs valuation zero and nonzero constant term")
        c0, h, length = self._unit_part()
        out = _ps_log1p(h, length)
        out[0] += cmath.log(c0)
        return LaurentSeries(self.var, self.center, 0, out, length)

    def eval_at(self, t):
        """Value of the truncated series at local parameter value t."""
        return sum(c * t ** (self.n0 + i) for i, c in enumerate(self.coeffs))

    def __repr__(self):
        bits = []
        for i, c in enumerate(self.coeffs[:8]):
            bits.append("(%g%+gj) t^%d" % (c.real, c.imag, self.n0 + i))
        return "LaurentSeries[%s @ %s; %s + O(t^%d)]" % (
            self.var, self.center, " + ".join(bits) or "0", self.order)


def _zero_like(s, order=None):
    return LaurentSeries(s.var, s.center, 0, [], s.order if order is None else order)


def _const_like(s, value, order=None):
    order = s.order if order is None else order
    return LaurentSeries(s.var, s.center, 0, [complex(value)], order)


# ---------------------------------------------------------------------------
# power-series kernels on coefficient lists (index = exponent)


def _ps_mul(a, b, length):
    out = [0j] * length
    for i, x in enumerate(a):
        if i >= length:
            break
        for j, y in enumerate(b):
            if i + j >= length:
                break
            out[i + j] += x * y
    return out


def _ps_inv(a, length):
    # a[0] == 1 assumed
    out = [0j] * length
    out[0] = 1.0 + 0j
    for k in range(1, length):
        acc = 0j
        for j in range(1, min(k, len(a) - 1) + 1):
            acc += a[j] * out[k - j]
        out[k] = -acc
    return out


def _ps_binomial(h, q, length):
    # (1 + (h - 1))^q with h[0] == 1, generalized binomial series
    u = [0j] * length
    for i in range(1, min(length, len(h))):
        u[i] = h[i]
    out = [0j] * length
    out[0] = 1.0 + 0j
    term = [0j] * length
    term[0] = 1.0 + 0j
    qf = Fraction(q)
    for j in range(1, length):
        term = _ps_mul(term, u, length)
        coeff = float(Fraction(math.prod((qf - i) for i in range(j)), math.factorial(j)))
        if all(abs(c) == 0 for c in term):
            break
        for k in range(length):
            out[k] += coeff * term[k]
    return out


def _ps_exp(u, length):
    # u[0] == 0
    out = [0j] * length
    out[0] = 1.0 + 0j
    term = [0j] * length
    term[0] = 1.0 + 0j
    for j in range(1, length):
        term = _ps_mul(term, u, length)
        if all(c == 0 for c in term):
            break
        fac = 1.0 / math.factorial(j)
        for k in range(length):
            out[k] += fac * term[k]
    return out


def _ps_log1p(h, length):
    # log of h with h[0] == 1
    u = [0j] * length
    for i in range(1, min(length, len(h))):
        u[i] = h[i]
    out = [0j] * length
    term = [0j] * length
    term[0] = 1.0 + 0j
    for j in range(1, length):
        term = _ps_mul(term, u, length)
        if all(c == 0 for c in term):
            break
        sign = (-1.0) ** (j + 1) / j
        for k in range(length):
            out[k] += sign * term[k]
    return out


def _ps_compose(a, b, length):
    # a(b(t)) with b[0] == 0
    out = [0j] * length
    power = [0j] * length
    power[0] = 1.0 + 0j
    for j, c in enumerate(a):
        if j >= length:
            break
        for k in range(length):
            out[k] += c * power[k]
        power = _ps_mul(power, b, length)
    return out


# ---------------------------------------------------------------------------
# expansion of expression trees


def expand(e, var, center, order, base=None):
    """Laurent expansion of an expression around var = center (or infinity).

    `base` binds every other free variable.  Supported node kinds: rational
    operations, rational powers of series with compatible valuation, exp of
    pole-free series and log of unit series.  Theta- or polylog-type nodes
    raise EssentialSingularityError; the catalog reduces those models to
    rational data before any series work.
    """
    base = base or {}
    for slack in (8, 20, 48):
        s = _expand_walk(e, var, center, order + slack, base, {})
        if s.order >= order:
            return LaurentSeries(s.var, s.center, s.n0, s.coeffs[:max(0, order - s.n0)], order)
    raise SeriesError("truncation slack exhausted expanding around %r" % (center,))


def _expand_walk(e, var, center, order, base, memo):
    key = id(e)
    got = memo.get(key)
    if got is not None:
        return got
    s = _expand_node(e, var, center, order, base, memo)
    memo[key] = s
    return s


def _expand_node(e, var, center, order, base, memo):
    rec = lambda child: _expand_walk(child, var, center, order, base, memo)
    if isinstance(e, ex.Const):
        return LaurentSeries(var, center, 0, [e.value], order)
    if isinstance(e, ex.Var):
        if e.name != var:
            val = base.get(e.name)
            if val is None:
                raise ex.UnboundVariableError(e.name)
            return LaurentSeries(var, center, 0, [complex(val)], order)
        if center == INFINITY:
            return LaurentSeries(var, center, -1, [1.0 + 0j], order)
        return LaurentSeries(var, center, 0, [complex(center), 1.0 + 0j], order)
    if isinstance(e, ex.Sum):
        out = rec(e.terms[0])
        for t in e.terms[1:]:
            out = out + rec(t)
        return out
    if isinstance(e, ex.Prod):
        out = rec(e.factors[0])
        for f in e.factors[1:]:
            out = out * rec(f)
        return out
    if isinstance(e, ex.Neg):
        return -rec(e.arg)
    if isinstance(e, ex.Pow):
        return rec(e.base) ** e.n
    if isinstance(e, ex.RatPow):
        return rec(e.base).fractional_power(e.q)
    if isinstance(e, ex.Exp):
        return rec(e.arg).exp()
    if isinstance(e, ex.Log):
        return rec(e.arg).log()
    raise EssentialSingularityError(
        "no Laurent expansion rule for node kind %r" % (e.kind,))


def residue(s):
    """Residue of s d(var): coefficient of t^-1, or at infinity -[t^1]."""
    if s.center == INFINITY:
        if s.order <= 1:
            raise SeriesError("series not resolved to the t^1 coefficient")
        return -s.coefficient(1)
    if s.n0 > -1 or s.is_zero():
        return 0j
    if s.order <= -1:
        raise SeriesError("series not resolved to the t^-1 coefficient")
    return s.coefficient(-1)


def invert_branch(s, m, order):
    """Invert lambda = x^m + ... at infinity: x as a Laurent series in k,
    where lambda(x(k)) = k^m.

    `s` is the expansion of lambda at infinity with leading coefficient one
    at t^-m.  Returns the series x(k) (a Laurent series at infinity in a
    variable named 'k...') and checks that recomposition reproduces k^m.
    """
    if s.center != INFINITY:
        raise SeriesError("invert_branch expects a series at infinity")
    if s.valuation() != -m or abs(s.coeffs[0] - 1.0) > 1e-12:
        raise SeriesError("wrong leading term: need coefficient 1 at x^%d" % m)
    length = order + 2
    # kappa = lambda^{1/m} = t^-1 * G(t),  W = 1/kappa = t / G
    g = s.fractional_power(Fraction(1, m))  # t^-1 * G
    gcoef = [0j] * length
    for i, c in enumerate(g.coeffs):
        k = g.n0 + i + 1  # shift so gcoef is the power series G(t)
        if 0 <= k < length:
            gcoef[k] = c
    w = _ps_inv([c for c in gcoef], length)  # 1/G
    w = [0j] + w[:length - 1]  # t/G
    tcoef = _ps_series_inverse(w, length)  # T(sigma): W(T) = sigma
    # x = 1/T = sigma^-1 * (T/sigma)^-1
    unit = tcoef[1:] + [0j]
    xinv = _ps_inv(unit, length - 1)
    xk = LaurentSeries("k", INFINITY, -1, xinv, order)
    # recomposition check: sum_j c_j T^j must equal sigma^-m.  The T-powers
    # are only trustworthy up to sigma^(length-2), so stop the scan there.
    recomposed = _recompose(s, tcoef, length)
    worst = 0.0
    for kpow in range(-m, length - 1 - m):
        want = 1.0 if kpow == -m else 0.0
        gotv = recomposed.get(kpow, 0j)
        worst = max(worst, abs(gotv - want))
    if worst > 1e-10:
        raise SeriesError("recomposition residual %.3e exceeds 1e-10; "
                          "raise the truncation order" % worst)
    return xk


def _ps_series_inverse(w, length):
    """Functional inverse T of a power series W with W[0]=0, W[1]=1."""
    t = [0j] * length
    t[1] = 1.0 + 0j
    wprime = [(i + 1) * w[i + 1] for i in range(len(w) - 1)]
    for _ in range(max(4, int(math.log2(length)) + 2)):
        wt = _ps_compose(w, t, length)
        diff = list(wt)
        diff[1] -= 1.0
        if all(abs(c) < 1e-16 for c in diff):
            break
        dwt = _ps_compose(wprime, t, length)
        corr = _ps_mul(diff, _ps_inv(dwt, length), length)
        t = [t[i] - corr[i] for i in range(length)]
    return t


def _recompose(s, tcoef, length):
    """Coefficients (by exponent of sigma) of sum_j s_j * T(sigma)^j."""
    out = {}
    unit = tcoef[1:] + [0j]  # T/sigma
    for i, c in enumerate(s.coeffs):
        j = s.n0 + i
        upow = _ps_powlist(unit, abs(j), length, inverse=(j < 0))
        for k, v in enumerate(upow):
            out[k + j] = out.get(k + j, 0j) + c * v
    return out


def _ps_powlist(unit, n, length, inverse):
    base = _ps_inv(unit, length) if inverse else list(unit)
    out = [0j] * length
    out[0] = 1.0 + 0j
    for _ in range(n):
        out = _ps_mul(out, base, length)
    return out
