"""Immutable symbolic expression trees over the complex numbers.

The node vocabulary covers everything the model catalog needs: rational
operations, integer and rational powers, exp/log, di- and trilogarithms,
Jacobi theta-1 derivatives, the Dedekind eta logarithm and elliptic
polylogarithms.  Trees support exact differentiation with respect to named
variables and pointwise numerical evaluation.  Subtrees are shared rather
than copied, and evaluation memoises on node identity, so repeated
differentiation stays cheap.

No canonicalisation is attempted beyond constant folding at construction
time; the residual checks downstream only ever compare values.
"""

import cmath
import math
from fractions import Fraction

from . import specfn

FOUR_PI_I = 4j * math.pi


class UnboundVariableError(KeyError):
    """A free variable had no binding in the evaluation point."""


class NumericDomainError(ArithmeticError):
    """Evaluation produced a non-finite value; carries the node kind."""

    def __init__(self, kind, detail=""):
        super().__init__("non-finite value in %s node %s" % (kind, detail))
        self.kind = kind


class DerivativeOrderError(ValueError):
    """Differentiation would exceed a supported special-function order."""


def _isfinite(z):
    return math.isfinite(z.real) and math.isfinite(z.imag)


class Expr:
    kind = "expr"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, pow_(other, -1))

    def __rtruediv__(self, other):
        return mul(other, pow_(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return pow_(self, n)


class Const(Expr):
    kind = "constant"

    def __init__(self, value):
        self.value = complex(value)

    def _eval(self, point, cache):
        return self.value

    def _diff(self, var, d):
        return ZERO

    def __repr__(self):
        return "Const(%r)" % (self.value,)


ZERO = Const(0.0)
ONE = Const(1.0)


class Var(Expr):
    kind = "variable"

    def __init__(self, name):
        self.name = name

    def _eval(self, point, cache):
        try:
            return complex(point[self.name])
        except KeyError:
            raise UnboundVariableError(self.name) from None

    def _diff(self, var, d):
        return ONE if self.name == var else ZERO

    def __repr__(self):
        return "Var(%r)" % (self.name,)


class Sum(Expr):
    kind = "sum"

    def __init__(self, terms):
        self.terms = terms

    def _eval(self, point, cache):
        return sum(_ev(t, point, cache) for t in self.terms)

    def _diff(self, var, d):
        return add(*[d(t) for t in self.terms])


class Prod(Expr):
    kind = "product"

    def __init__(self, factors):
        self.factors = factors

    def _eval(self, point, cache):
        acc = 1.0 + 0j
        for f in self.factors:
            acc *= _ev(f, point, cache)
        return acc

    def _diff(self, var, d):
        fs = self.factors
        terms = []
        for i, f in enumerate(fs):
            df = d(f)
            if df is ZERO or (isinstance(df, Const) and df.value == 0):
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)


class Neg(Expr):
    kind = "negation"

    def __init__(self, arg):
        self.arg = arg

    def _eval(self, point, cache):
        return -_ev(self.arg, point, cache)

    def _diff(self, var, d):
        return neg(d(self.arg))


class Pow(Expr):
    kind = "integer-power"

    def __init__(self, base, n):
        self.base = base
        self.n = n

    def _eval(self, point, cache):
        b = _ev(self.base, point, cache)
        if self.n < 0 and b == 0:
            raise NumericDomainError(self.kind, "zero base, exponent %d" % self.n)
        v = b ** self.n
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        return mul(Const(self.n), pow_(self.base, self.n - 1), d(self.base))


class RatPow(Expr):
    kind = "rational-power"

    def __init__(self, base, q):
        self.base = base
        self.q = Fraction(q)

    def _eval(self, point, cache):
        b = _ev(self.base, point, cache)
        if b == 0:
            raise NumericDomainError(self.kind, "zero base")
        v = cmath.exp(float(self.q) * cmath.log(b))
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        return mul(Const(float(self.q)), RatPow(self.base, self.q - 1), d(self.base))


class Exp(Expr):
    kind = "exp"

    def __init__(self, arg):
        self.arg = arg

    def _eval(self, point, cache):
        v = cmath.exp(_ev(self.arg, point, cache))
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        return mul(self, d(self.arg))


class Log(Expr):
    kind = "log"

    def __init__(self, arg):
        self.arg = arg

    def _eval(self, point, cache):
        a = _ev(self.arg, point, cache)
        if a == 0:
            raise NumericDomainError(self.kind, "log of zero")
        return cmath.log(a)

    def _diff(self, var, d):
        return mul(d(self.arg), pow_(self.arg, -1))


class Li(Expr):
    """Classical polylogarithm Li_n, n = 2 or 3."""

    kind = "li"

    def __init__(self, n, arg):
        if n not in (2, 3):
            raise ValueError("Li order must be 2 or 3")
        self.n = n
        self.arg = arg

    def _eval(self, point, cache):
        v = specfn.li(self.n, _ev(self.arg, point, cache))
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        z = self.arg
        if self.n == 3:
            inner = mul(Li(2, z), pow_(z, -1))
        else:
            # Li2'(z) = -log(1-z)/z
            inner = neg(mul(Log(add(ONE, neg(z))), pow_(z, -1)))
        return mul(inner, d(z))


class Theta1(Expr):
    """k-th x-derivative of Jacobi theta-1; 0 <= k <= 4 enforced at build."""

    kind = "theta1_deriv"

    def __init__(self, k, xarg, tauarg):
        if not 0 <= k <= 4:
            raise DerivativeOrderError("theta1 derivative order %r out of 0..4" % (k,))
        self.k = k
        self.xarg = xarg
        self.tauarg = tauarg

    def _eval(self, point, cache):
        tau = _ev(self.tauarg, point, cache)
        v = specfn.theta1(self.k, _ev(self.xarg, point, cache), _theta_ctx(tau))
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        terms = []
        dx = d(self.xarg)
        if not _is_zero(dx):
            terms.append(mul(Theta1(self.k + 1, self.xarg, self.tauarg), dx))
        dt = d(self.tauarg)
        if not _is_zero(dt):
            # heat equation: 4*pi*i * dtheta/dtau = theta''
            terms.append(mul(Const(1.0 / FOUR_PI_I),
                             Theta1(self.k + 2, self.xarg, self.tauarg), dt))
        return add(*terms)


class EtaLog(Expr):
    """order-th tau-derivative of log(Dedekind eta); orders 0..2."""

    kind = "dedekind_eta_log"

    def __init__(self, tauarg, order=0):
        if not 0 <= order <= 2:
            raise DerivativeOrderError("eta-log derivative order %r out of 0..2" % (order,))
        self.order = order
        self.tauarg = tauarg

    def _eval(self, point, cache):
        tau = _ev(self.tauarg, point, cache)
        if self.order == 0:
            return specfn.dedekind_eta_log(tau)
        return specfn.dedekind_eta_log_deriv(self.order, tau)

    def _diff(self, var, d):
        dt = d(self.tauarg)
        if _is_zero(dt):
            return ZERO
        return mul(EtaLog(self.tauarg, self.order + 1), dt)


class ELi(Expr):
    """Elliptic polylogarithm of order n (0..3), tau-differentiated dtau times."""

    kind = "elliptic_li"

    def __init__(self, n, uarg, tauarg, dtau=0):
        if not 0 <= n <= 3:
            raise DerivativeOrderError("elliptic polylog order %r out of 0..3" % (n,))
        if dtau < 0 or n - dtau < 0:
            raise DerivativeOrderError("elliptic polylog tau-order %r too high" % (dtau,))
        self.n = n
        self.dtau = dtau
        self.uarg = uarg
        self.tauarg = tauarg

    def _eval(self, point, cache):
        tau = _ev(self.tauarg, point, cache)
        v = specfn.elliptic_li(self.n, _ev(self.uarg, point, cache),
                               _theta_ctx(tau), dtau=self.dtau)
        if not _isfinite(v):
            raise NumericDomainError(self.kind)
        return v

    def _diff(self, var, d):
        terms = []
        du = d(self.uarg)
        if not _is_zero(du):
            if self.n == 0:
                raise DerivativeOrderError("u-derivative of order-0 elliptic polylog")
            inner = mul(Const(2j * math.pi), ELi(self.n - 1, self.uarg, self.tauarg, self.dtau))
            if self.dtau == 0:
                inner = add(inner, Const(specfn.elliptic_li_du_constant(self.n)))
            terms.append(mul(inner, du))
        dt = d(self.tauarg)
        if not _is_zero(dt):
            terms.append(mul(ELi(self.n, self.uarg, self.tauarg, self.dtau + 1), dt))
        return add(*terms)


_CTX_CACHE = {}


def _theta_ctx(tau):
    ctx = _CTX_CACHE.get(tau)
    if ctx is None:
        ctx = specfn.theta_context(tau)
        if len(_CTX_CACHE) > 64:
            _CTX_CACHE.clear()
        _CTX_CACHE[tau] = ctx
    return ctx


# ---------------------------------------------------------------------------
# constructors with light constant folding


def as_expr(x):
    if isinstance(x, Expr):
        return x
    return Const(x)


def _is_zero(e):
    return isinstance(e, Const) and e.value == 0


def add(*terms):
    flat = []
    const = 0j
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Const):
            const += t.value
        elif isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    if const != 0:
        flat.append(Const(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors):
    flat = []
    const = 1.0 + 0j
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Const):
            const *= f.value
        elif isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    if const == 0:
        return ZERO
    if const != 1:
        flat.insert(0, Const(const))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Prod(tuple(flat))


def neg(x):
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(-x.value)
    if isinstance(x, Neg):
        return x.arg
    return Neg(x)


def pow_(base, n):
    base = as_expr(base)
    if isinstance(n, Fraction) and n.denominator != 1:
        return RatPow(base, n)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("constant zero to negative power")
        return Const(base.value ** n)
    return Pow(base, n)


def exp(x):
    return Exp(as_expr(x))


def log(x):
    return Log(as_expr(x))


def li2(x):
    return Li(2, as_expr(x))


def li3(x):
    return Li(3, as_expr(x))


def theta1(k, x, tau):
    return Theta1(k, as_expr(x), as_expr(tau))


def eta_log(tau):
    return EtaLog(as_expr(tau))


def elliptic_li(n, u, tau):
    return ELi(n, as_expr(u), as_expr(tau))


# ---------------------------------------------------------------------------
# evaluation / differentiation / vector fields


def _ev(node, point, cache):
    key = id(node)
    hit = cache.get(key)
    if hit is not None:
        return hit
    val = node._eval(point, cache)
    cache[key] = val
    return val


def evaluate(e, point):
    """Evaluate an expression at a point (a mapping var name -> complex)."""
    val = _ev(e, point, {})
    if not _isfinite(val):
        raise NumericDomainError(e.kind, "at top level")
    return val


def differentiate(e, var):
    """Exact symbolic partial derivative with respect to the named variable."""
    memo = {}

    def d(node):
        key = id(node)
        got = memo.get(key)
        if got is None:
            got = node._diff(var, d)
            memo[key] = got
        return got

    return d(e)


def derivative(e, *vars_):
    """Convenience: iterated differentiate, one variable name per argument."""
    for v in vars_:
        e = differentiate(e, v)
    return e


class VectorField:
    """List of (coordinate name, coefficient expression) pairs."""

    def __init__(self, components):
        self.components = tuple((name, as_expr(c)) for name, c in components)

    def coefficient(self, name):
        for n, c in self.components:
            if n == name:
                return c
        return ZERO

    def __repr__(self):
        return "VectorField(%r)" % (list(self.components),)


def lie_derivative(field, e):
    """Sum over components of coeff * d(e)/d(coord)."""
    return add(*[mul(c, differentiate(e, name)) for name, c in field.components])
