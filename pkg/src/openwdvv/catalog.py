"""Constructors for the explicit model families.

Each builder returns a ModelBundle carrying the superpotential, the extended
prepotential, the dual prepotential when available in closed form, Euler and
eventual-identity fields, charge data and the curve object that geometry uses
for critical points.  Bundles are immutable after construction; builders are
pure.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import expr as ex
from . import geometry as geo

TWO_PI_I = 2j * math.pi


class DerivBank:
    """Cached iterated derivatives of a fixed expression.

    Mixed partials commute, so the cache key is the sorted variable tuple.
    """

    def __init__(self, expression):
        self.expression = expression
        self._cache = {(): expression}

    def d(self, *vars_):
        key = tuple(sorted(vars_))
        got = self._cache.get(key)
        if got is None:
            got = ex.differentiate(self.d(*key[:-1]), key[-1])
            self._cache[key] = got
        return got


@dataclass
class ModelBundle:
    family: str
    params: dict
    chart: tuple               # flat chart names used by the WDVV checks
    param_names: tuple         # variables of lam besides x
    lam: ex.Expr
    Omega: ex.Expr
    omega_scale: int           # omega = a dx, a in {+1, -1}
    charge: float
    d0: float
    E: ex.VectorField
    Ee: ex.VectorField         # eventual identity
    dual: bool
    curve: object
    Fstar: ex.Expr = None
    cometric_fn: object = None  # closed-form contraction matrix, or None
    chart_kind: str = "direct"  # or "saito_a"
    ell: int = 0
    singular_shifts: tuple = ()  # expressions whose x-proximity is guarded
    x_guard_mode: str = "plain"  # plain | exp | lattice
    min_im_tau: float = 0.0
    _banks: dict = field(default_factory=dict, repr=False)

    def bank(self, name):
        b = self._banks.get(name)
        if b is None:
            base = {"lam": self.lam, "Omega": self.Omega, "Fstar": self.Fstar}[name]
            if base is None:
                raise ValueError("bundle %s has no %s" % (self.family, name))
            b = DerivBank(base)
            self._banks[name] = b
        return b

    def dlam(self, *vs):
        return self.bank("lam").d(*vs)

    def dOmega(self, *vs):
        return self.bank("Omega").d(*vs)

    def dFstar(self, *vs):
        return self.bank("Fstar").d(*vs)

    # -- chart plumbing ----------------------------------------------------

    def full_point(self, chart_values):
        """Point dict binding the chart and, for type A, the parameters."""
        pt = dict(zip(self.chart, chart_values))
        if self.chart_kind == "saito_a":
            a = geo.invert_flat_map(self.ell, np.asarray(chart_values, dtype=complex))
            pt.update({n: a[i] for i, n in enumerate(self.param_names)})
        return pt

    def chart_map(self, point):
        """Matrix d(param)/d(chart) at the point, or None when they agree."""
        if self.chart_kind != "saito_a":
            return None
        a = np.array([point[n] for n in self.param_names])
        st = geo.chart_state(self.ell, a_values=a)
        return st["da_dv"]

    def chart_hessian(self, point):
        if self.chart_kind != "saito_a":
            return None
        a = np.array([point[n] for n in self.param_names])
        st = geo.chart_state(self.ell, a_values=a)
        return st["d2a_dv2"]

    def field_components(self, field_vf, point):
        """Components of a stored vector field in the chart frame at a point.

        Fields are stored over param variables; for the type-A chart they are
        pushed with dv/da = (da/dv)^-1.
        """
        comp_param = np.zeros(len(self.param_names), dtype=complex)
        xcomp = 0j
        for name, coeff in field_vf.components:
            val = ex.evaluate(coeff, point)
            if name == "x":
                xcomp = val
            else:
                comp_param[self.param_names.index(name)] = val
        if self.chart_kind == "saito_a":
            m = self.chart_map(point)  # da/dv
            comp = np.linalg.solve(m, comp_param) if m is not None else comp_param
        else:
            comp = comp_param
        return comp, xcomp

    def perturbed_lambda(self, eps):
        """Copy of the bundle with lambda -> lambda * exp(eps x)."""
        import copy
        other = copy.copy(self)
        other._banks = {}
        other.lam = ex.mul(self.lam, ex.exp(ex.mul(ex.Const(eps), ex.Var("x"))))
        return other

    def with_varpi(self, varpi):
        raise NotImplementedError  # builders take varpi overrides directly


@dataclass
class RankTwoBundle:
    family: str
    ell: int
    chart: tuple
    param_names: tuple
    fibres: tuple               # ("z", "w")
    Phi: ex.Expr
    Psi: ex.Expr
    f: ex.Expr                 # miniversal deformation
    ee: ex.VectorField
    _banks: dict = field(default_factory=dict, repr=False)

    def bank(self, which):
        b = self._banks.get(which)
        if b is None:
            b = DerivBank({"Phi": self.Phi, "Psi": self.Psi, "f": self.f}[which])
            self._banks[which] = b
        return b

    def full_point(self, chart_values):
        pt = dict(zip(self.chart, chart_values))
        a = geo.invert_flat_map(self.ell, np.asarray(chart_values, dtype=complex))
        pt.update({n: a[i] for i, n in enumerate(self.param_names)})
        return pt


@dataclass
class IntegrationPath:
    """Ordered waypoints for twisted-period quadrature."""
    waypoints: tuple
    nodes: int = 48


# ---------------------------------------------------------------------------
# small expression helpers

X = ex.Var("x")


def _wvars(n, stem="w"):
    return ["%s%d" % (stem, i) for i in range(1, n + 1)]


def _poly_coeffs_from_roots(root_exprs):
    """Expression coefficients (highest degree first) of prod (x - r_i)."""
    coeffs = [ex.ONE]
    for r in root_exprs:
        nxt = [ex.ZERO] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] = ex.add(nxt[i], c)
            nxt[i + 1] = ex.add(nxt[i + 1], ex.mul(ex.Const(-1), c, r))
        coeffs = nxt
    return coeffs


def build_varpi_a(ell):
    """Integration constant of the type-A extended prepotential.

    The coefficient of v1^k1 .. vl^kl is (k1+..+kl-2)!/(k1!..kl!)/(l+1) on
    the weight shell sum (alpha+1) k_alpha = l+2, and zero elsewhere.
    """
    terms = []
    for combo in geo._weighted_compositions(ell, ell + 2):
        ktot = sum(combo)
        if ktot < 2:
            continue
        coeff = Fraction(math.factorial(ktot - 2), ell + 1)
        for c in combo:
            coeff /= math.factorial(c)
        factors = [ex.Const(complex(coeff))]
        for alpha, c in enumerate(combo, start=1):
            if c:
                factors.append(ex.pow_(ex.Var("v%d" % alpha), c))
        terms.append(ex.mul(*factors))
    return ex.add(*terms)


def build_saito_a(ell, varpi=None):
    if not 1 <= ell <= 8:
        raise ValueError("type-A parameter out of range: %r" % (ell,))
    h = ell + 1
    avars = _wvars(ell, "a")
    vvars = _wvars(ell, "v")
    lam = ex.add(ex.pow_(X, h),
                 *[ex.mul(ex.Var(a), ex.pow_(X, ell - mu))
                   for mu, a in enumerate(avars, start=1)])
    if varpi is None:
        varpi = build_varpi_a(ell)
    omega = ex.add(ex.mul(ex.Const(1.0 / (ell + 2)), ex.pow_(X, ell + 2)),
                   *[ex.mul(ex.Const(1.0 / (h - mu)), ex.Var(a), ex.pow_(X, h - mu))
                     for mu, a in enumerate(avars, start=1)],
                   varpi)
    E = ex.VectorField([(a, ex.mul(ex.Const((mu + 1) / h), ex.Var(a)))
                        for mu, a in enumerate(avars, start=1)])
    Ee = ex.VectorField(list(E.components) + [("x", ex.mul(ex.Const(1.0 / h), X))])
    coeff_exprs = [ex.ONE, ex.ZERO] + [ex.Var(a) for a in avars]
    return ModelBundle(
        family="saito-a", params={"ell": ell}, ell=ell,
        chart=tuple(vvars), param_names=tuple(avars),
        lam=lam, Omega=omega, omega_scale=1,
        charge=1.0 - 2.0 / h, d0=0.0, E=E, Ee=Ee, dual=False,
        curve=geo.PolyCurve(coeff_exprs), chart_kind="saito_a")


def build_saito_d(ell, varpi=None):
    if ell < 3:
        raise ValueError("type-D parameter must be >= 3")
    h = 2 * (ell - 1)
    avars = _wvars(ell, "a")
    al = ex.Var(avars[-1])
    # polynomial part: coefficient of x^{2(l-1-i)} is a_i / 2^{l-1-i}, a_0 = 1
    even_coeffs = [ex.Const(1.0 / 2 ** (ell - 1))]
    for i in range(1, ell - 1):
        even_coeffs.append(ex.mul(ex.Const(1.0 / 2 ** (ell - 1 - i)),
                                  ex.Var(avars[i - 1])))
    even_coeffs.append(ex.Var(avars[ell - 2]))
    terms = [ex.mul(c, ex.pow_(X, 2 * (ell - 1 - i)))
             for i, c in enumerate(even_coeffs)]
    s_expr = ex.mul(ex.Const(-0.5), ex.pow_(al, 2))
    terms.append(ex.mul(s_expr, ex.pow_(X, -2)))
    lam = ex.add(*terms)
    pcoeffs = []
    for i, c in enumerate(even_coeffs):
        pcoeffs.append(c)
        if i < len(even_coeffs) - 1:
            pcoeffs.append(ex.ZERO)
    om_terms = [ex.mul(ex.Const(1.0 / (2 * (ell - 1 - i) + 1)), c,
                       ex.pow_(X, 2 * (ell - 1 - i) + 1))
                for i, c in enumerate(even_coeffs)]
    om_terms.append(ex.mul(ex.Const(0.5), ex.pow_(al, 2), ex.pow_(X, -1)))
    if varpi is not None:
        om_terms.append(varpi)
    omega = ex.add(*om_terms)
    weights = [2 * i for i in range(1, ell - 1)] + [h, ell]
    E = ex.VectorField([(a, ex.mul(ex.Const(weights[i] / h), ex.Var(a)))
                        for i, a in enumerate(avars)])
    Ee = ex.VectorField(list(E.components) + [("x", ex.mul(ex.Const(1.0 / h), X))])
    return ModelBundle(
        family="saito-d", params={"ell": ell}, ell=ell,
        chart=tuple(avars), param_names=tuple(avars),
        lam=lam, Omega=omega, omega_scale=1,
        charge=1.0 - 2.0 / h, d0=0.0, E=E, Ee=Ee, dual=False,
        curve=geo.PolyPoleCurve(pcoeffs, s_expr), chart_kind="direct")


def build_dual_saito_a(ell, varpi=None):
    wvars = _wvars(ell)
    wbar = ex.add(*[ex.Var(w) for w in wvars])
    zero_exprs = [ex.Var(w) for w in wvars] + [ex.neg(wbar)]
    lam = ex.mul(*[ex.add(X, ex.neg(z)) for z in zero_exprs])
    # (x-z)(log(x-z) - 1) is the exact antiderivative of log(x-z); the extra
    # linear term is invisible to every second-derivative check
    om_terms = [ex.mul(ex.add(X, ex.neg(z)),
                       ex.add(ex.log(ex.add(X, ex.neg(z))), ex.Const(-1)))
                for z in zero_exprs]
    if varpi is not None:
        om_terms.append(varpi)
    omega = ex.add(*om_terms)
    fterms = []
    for i in range(ell):
        for j in range(i + 1, ell):
            dw = ex.add(ex.Var(wvars[i]), ex.neg(ex.Var(wvars[j])))
            fterms.append(ex.mul(ex.Const(0.5), ex.pow_(dw, 2), ex.log(dw)))
    for i in range(ell):
        sw = ex.add(ex.Var(wvars[i]), wbar)
        fterms.append(ex.mul(ex.Const(0.5), ex.pow_(sw, 2), ex.log(sw)))
    fstar = ex.add(*fterms)
    scale = 1.0 / (ell + 1)
    E = ex.VectorField([(w, ex.mul(ex.Const(scale), ex.Var(w))) for w in wvars])
    Ee = ex.VectorField(list(E.components) + [("x", ex.mul(ex.Const(scale), X))])
    return ModelBundle(
        family="dual-saito-a", params={"ell": ell}, ell=ell,
        chart=tuple(wvars), param_names=tuple(wvars),
        lam=lam, Omega=omega, Fstar=fstar, omega_scale=1,
        charge=1.0 - 2.0 / (ell + 1), d0=0.0, E=E, Ee=Ee, dual=True,
        curve=geo.PolyCurve(_poly_coeffs_from_roots(zero_exprs)),
        chart_kind="direct", singular_shifts=tuple(zero_exprs))


def _exp_diff(a, b):
    """1/(e^(a-b) - 1) as an expression."""
    return ex.pow_(ex.add(ex.exp(ex.add(a, ex.neg(b))), ex.Const(-1)), -1)


def build_dz_a(ell, r, varpi=None):
    if ell < 1 or r < 1:
        raise ValueError("need ell >= 1 and r >= 1")
    n = ell + r
    wvars = _wvars(n)
    ws = [ex.Var(w) for w in wvars]
    ey = ex.exp(X)
    lam = ex.mul(ex.exp(ex.mul(ex.Const(-r), X)),
                 *[ex.add(ey, ex.neg(ex.exp(w))) for w in ws])
    if varpi is None:
        varpi = ex.mul(ex.Const(0.5), ex.add(*[ex.pow_(w, 2) for w in ws]))
    omega = ex.add(ex.mul(ex.Const(r / 2.0), ex.pow_(X, 2)),
                   ex.neg(ex.mul(X, ex.add(*ws))),
                   *[ex.li2(ex.exp(ex.add(X, ex.neg(w)))) for w in ws],
                   varpi)
    c3 = (3.0 + ell - r - 2.0 / r) / 12.0
    fterms = []
    for i in range(n):
        for j in range(i + 1, n):
            fterms.append(ex.neg(ex.mul(ex.Const(0.5), ex.add(
                ex.li3(ex.exp(ex.add(ws[i], ex.neg(ws[j])))),
                ex.li3(ex.exp(ex.add(ws[j], ex.neg(ws[i]))))))))
    fterms.append(ex.mul(ex.Const(c3), ex.add(*[ex.pow_(w, 3) for w in ws])))
    quarter = 0.25 * (1.0 - 2.0 / r)
    for i in range(n):
        for j in range(i + 1, n):
            fterms.append(ex.mul(ex.Const(quarter), ws[i], ws[j],
                                 ex.add(ws[i], ws[j])))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                fterms.append(ex.mul(ex.Const(-1.0 / r), ws[i], ws[j], ws[k]))
    fstar = ex.add(*fterms)
    E = ex.VectorField([(w, ex.Const(1.0 / ell)) for w in wvars])
    Ee = ex.VectorField(list(E.components) + [("x", ex.Const(1.0 / ell))])

    def cometric(point):
        return np.full((n, n), 1.0 / ell, dtype=complex) - np.eye(n)

    return ModelBundle(
        family="dz-a", params={"ell": ell, "r": r}, ell=ell,
        chart=tuple(wvars), param_names=tuple(wvars),
        lam=lam, Omega=omega, Fstar=fstar, omega_scale=-1,
        charge=1.0, d0=1.0 / ell, E=E, Ee=Ee, dual=True,
        curve=geo.TrigCurve(r, [ex.Var(w) for w in wvars]),
        cometric_fn=cometric, chart_kind="direct",
        singular_shifts=tuple(ws), x_guard_mode="exp")


def build_ma_zuo(ell=None, r=None, k=None, n=None, ks=None, varpi=None):
    """Ma-Zuo family: (ell, r, k) form or generalized (n, r, ks) form."""
    if n is None:
        n = ell + r + k
        ks = (k,)
        uvars = ["u"]
    else:
        ks = tuple(ks)
        uvars = _wvars(len(ks), "u") if len(ks) > 1 else ["u"]
        ell = n - r - sum(ks)
    if n <= r + sum(ks):
        raise ValueError("need n > r + sum(k)")
    ell = n - r - sum(ks)
    wvars = _wvars(n)
    ws = [ex.Var(w) for w in wvars]
    us = [ex.Var(u) for u in uvars]
    ey = ex.exp(X)
    lam = ex.mul(ex.exp(ex.mul(ex.Const(-r), X)),
                 *[ex.add(ey, ex.neg(ex.exp(w))) for w in ws],
                 *[ex.pow_(ex.add(ey, ex.neg(ex.exp(u))), -km)
                   for u, km in zip(us, ks)])
    if varpi is None:
        varpi = ex.mul(ex.Const(0.5), ex.add(
            *[ex.pow_(w, 2) for w in ws],
            *[ex.mul(ex.Const(-km), ex.pow_(u, 2)) for u, km in zip(us, ks)]))
    omega = ex.add(
        ex.mul(ex.Const(r / 2.0), ex.pow_(X, 2)),
        ex.neg(ex.mul(X, ex.add(*ws, *[ex.mul(ex.Const(-km), u)
                                       for u, km in zip(us, ks)]))),
        *[ex.li2(ex.exp(ex.add(X, ex.neg(w)))) for w in ws],
        *[ex.mul(ex.Const(-km), ex.li2(ex.exp(ex.add(X, ex.neg(u)))))
          for u, km in zip(us, ks)],
        varpi)
    fstar = None
    if len(ks) == 1:
        kv = ks[0]
        u = us[0]
        fterms = []
        for i in range(n):
            for j in range(i + 1, n):
                fterms.append(ex.neg(ex.mul(ex.Const(0.5), ex.add(
                    ex.li3(ex.exp(ex.add(ws[i], ex.neg(ws[j])))),
                    ex.li3(ex.exp(ex.add(ws[j], ex.neg(ws[i]))))))))
        for i in range(n):
            fterms.append(ex.mul(ex.Const(kv / 2.0), ex.add(
                ex.li3(ex.exp(ex.add(u, ex.neg(ws[i])))),
                ex.li3(ex.exp(ex.add(ws[i], ex.neg(u)))))))
        fterms.append(ex.mul(ex.Const(kv * (3.0 * kv + r - ell + 2.0 * kv * kv / r) / 12.0),
                             ex.pow_(u, 3)))
        fterms.append(ex.mul(ex.Const((3.0 - r + ell - 2.0 / r) / 12.0),
                             ex.add(*[ex.pow_(w, 3) for w in ws])))
        quarter = 0.25 * (1.0 - 2.0 / r)
        for i in range(n):
            for j in range(i + 1, n):
                fterms.append(ex.mul(ex.Const(quarter), ws[i], ws[j],
                                     ex.add(ws[i], ws[j])))
        fterms.append(ex.mul(ex.Const(-0.25 * kv * (1.0 + 2.0 * kv / r)),
                             ex.pow_(u, 2), ex.add(*ws)))
        fterms.append(ex.mul(ex.Const(-0.25 * kv * (1.0 - 2.0 / r)), u,
                             ex.add(*[ex.pow_(w, 2) for w in ws])))
        for i in range(n):
            for j in range(i + 1, n):
                for kk in range(j + 1, n):
                    fterms.append(ex.mul(ex.Const(-1.0 / r), ws[i], ws[j], ws[kk]))
        for i in range(n):
            for j in range(i + 1, n):
                fterms.append(ex.mul(ex.Const(kv / r), u, ws[i], ws[j]))
        fstar = ex.add(*fterms)
    chart = tuple(wvars + uvars)
    E = ex.VectorField([(c, ex.Const(1.0 / ell)) for c in chart])
    Ee = ex.VectorField(list(E.components) + [("x", ex.Const(1.0 / ell))])
    m = len(ks)

    def cometric(point):
        g = np.full((n + m, n + m), 1.0 / ell, dtype=complex)
        g[:n, :n] -= np.eye(n)
        for i, km in enumerate(ks):
            g[n + i, n + i] += 1.0 / km
        return g

    return ModelBundle(
        family="ma-zuo", params={"n": n, "r": r, "ks": ks, "ell": ell}, ell=ell,
        chart=chart, param_names=chart,
        lam=lam, Omega=omega, Fstar=fstar, omega_scale=-1,
        charge=1.0, d0=1.0 / ell, E=E, Ee=Ee, dual=True,
        curve=geo.TrigCurve(r, ws, us, ks),
        cometric_fn=cometric, chart_kind="direct",
        singular_shifts=tuple(ws) + tuple(us), x_guard_mode="exp")


def build_jacobi_a(ell):
    wvars = _wvars(ell)
    ws = [ex.Var(w) for w in wvars]
    u = ex.Var("u")
    tau = ex.Var("tau")
    wbar = ex.add(*ws)
    shifts = [wbar] + [ex.neg(w) for w in ws]          # theta1(x + shift)
    lam = ex.mul(
        ex.exp(ex.mul(ex.Const(TWO_PI_I), u)),
        *[ex.theta1(0, ex.add(X, s), tau) for s in shifts],
        ex.pow_(ex.theta1(0, X, tau), -(ell + 1)))
    c = ex.Const(1j / (2.0 * math.pi))
    om_terms = [ex.mul(ex.Const(TWO_PI_I), u, X)]
    for s in shifts:
        om_terms.append(ex.mul(c, ex.add(
            ex.elliptic_li(2, ex.add(X, s), tau),
            ex.neg(ex.elliptic_li(2, s, tau)))))
    om_terms.append(ex.mul(ex.Const(-(ell + 1)), c, ex.add(
        ex.elliptic_li(2, X, tau),
        ex.neg(ex.elliptic_li(2, ex.ZERO, tau)))))
    omega = ex.add(*om_terms)

    def phi3(arg):
        return ex.add(ex.elliptic_li(3, arg, tau),
                      ex.neg(ex.elliptic_li(3, ex.ZERO, tau)))

    wvec = [ex.neg(wbar)] + ws
    fterms = [ex.mul(ex.Const(TWO_PI_I), u, ex.add(
        ex.mul(ex.Const(0.5 * math.pi ** 2), tau, u),
        ex.neg(ex.pow_(wbar, 2)),
        *[ex.neg(ex.pow_(w, 2)) for w in ws]))]
    for i in range(ell + 1):
        for j in range(ell + 1):
            if i != j:
                fterms.append(ex.mul(ex.Const(-0.125),
                                     phi3(ex.add(wvec[i], ex.neg(wvec[j])))))
    quarter = ex.Const(0.25 * (ell + 1))
    fterms.append(ex.mul(quarter, phi3(ex.neg(wbar))))
    for w in ws:
        fterms.append(ex.mul(quarter, phi3(w)))
    fstar = ex.add(*fterms)
    chart = tuple(wvars + ["u", "tau"])
    E = ex.VectorField([("u", ex.Const(1.0 / TWO_PI_I))])
    Ee = E

    def cometric(point):
        g = np.zeros((ell + 2, ell + 2), dtype=complex)
        g[:ell, :ell] = 1.0 / (ell + 1) - np.eye(ell)
        g[ell, ell + 1] = g[ell + 1, ell] = 1.0 / math.pi ** 2
        return g

    return ModelBundle(
        family="jacobi-a", params={"ell": ell}, ell=ell,
        chart=chart, param_names=chart,
        lam=lam, Omega=omega, Fstar=fstar, omega_scale=1,
        charge=1.0, d0=0.0, E=E, Ee=Ee, dual=True,
        curve=geo.EllipticCurve(ell + 2),
        cometric_fn=cometric, chart_kind="direct",
        singular_shifts=tuple([ex.ZERO] + [ex.neg(s) for s in shifts]),
        x_guard_mode="lattice", min_im_tau=0.2)


def build_rank2_a(ell, psi_cubic=False):
    """Rank-two type-A extension; psi_cubic swaps Psi for the w^3 variant."""
    base = build_saito_a(ell)
    z = ex.Var("z")
    w = ex.Var("w")
    avars = base.param_names
    h = ell + 1
    phi = ex.add(ex.mul(ex.Const(1.0 / (ell + 2)), ex.pow_(z, ell + 2)),
                 *[ex.mul(ex.Const(1.0 / (h - mu)), ex.Var(a), ex.pow_(z, h - mu))
                   for mu, a in enumerate(avars, start=1)],
                 build_varpi_a(ell))
    lam_z = ex.add(ex.pow_(z, h),
                   *[ex.mul(ex.Var(a), ex.pow_(z, ell - mu))
                     for mu, a in enumerate(avars, start=1)])
    if psi_cubic:
        psi = ex.mul(ex.Const(1.0), ex.pow_(w, 3))
    else:
        psi = ex.mul(w, lam_z)
    f = ex.add(lam_z, ex.pow_(w, 2))
    ee = ex.VectorField(list(base.E.components) +
                        [("z", ex.mul(ex.Const(1.0 / h), z)),
                         ("w", ex.mul(ex.Const(0.5), w))])
    return RankTwoBundle(
        family="rank2-a", ell=ell, chart=base.chart, param_names=avars,
        fibres=("z", "w"), Phi=phi, Psi=psi, f=f, ee=ee)


def _fold_rule(rule, ell):
    if rule == "b":
        if ell < 2:
            raise ValueError("B-series folding needs ell >= 2")
        return 2 * ell - 1, [2 * i for i in range(ell)]
    if rule == "i2":
        if ell < 3:
            raise ValueError("dihedral folding needs ell >= 3")
        return ell - 1, sorted({0, ell - 2})
    raise KeyError("unknown folding rule %r" % (rule,))


def fold(source, rule, ell):
    """Folded bundle: the source type-A solution restricted to a linear slice.

    rule "b" embeds (v1..vl) as (v1,0,v2,0,..,vl) into A_{2l-1}; rule "i2"
    as (v1,0,..,0,v2) into A_{l-1}.  Returns a FoldedBundle delegating all
    evaluation to the source at embedded chart points.
    """
    src_ell, slots = _fold_rule(rule, ell)
    if source.family != "saito-a" or source.ell != src_ell:
        raise ValueError("rule %s-%d needs a saito-a source with ell=%d"
                         % (rule, ell, src_ell))
    return FoldedBundle(source, rule, ell, tuple(slots))


class FoldedBundle:
    def __init__(self, source, rule, ell, slots):
        self.source = source
        self.family = "fold-%s" % rule
        self.params = {"ell": ell, "source_ell": source.ell}
        self.ell = ell
        self.slots = slots
        self.chart = tuple("v%d" % (i + 1) for i in range(len(slots)))
        self.dual = False
        self.omega_scale = 1

    def embed(self, chart_values):
        out = np.zeros(self.source.ell, dtype=complex)
        for i, s in enumerate(self.slots):
            out[s] = chart_values[i]
        return out

    def full_point(self, chart_values):
        src = self.source.full_point(self.embed(chart_values))
        pt = dict(src)
        return pt


MODEL_BUILDERS = {
    "saito-a": lambda params: build_saito_a(int(params["ell"])),
    "saito-d": lambda params: build_saito_d(int(params["ell"])),
    "dual-saito-a": lambda params: build_dual_saito_a(int(params["ell"])),
    "dz-a": lambda params: build_dz_a(int(params["ell"]), int(params["r"])),
    "ma-zuo": lambda params: (
        build_ma_zuo(n=int(params["n"]), r=int(params["r"]),
                     ks=params["ks"]) if "n" in params else
        build_ma_zuo(int(params["ell"]), int(params["r"]), int(params["k"]))),
    "jacobi-a": lambda params: build_jacobi_a(int(params["ell"])),
}


def build_model(family, params):
    if family in MODEL_BUILDERS:
        return MODEL_BUILDERS[family](params)
    if family == "rank2-a":
        return build_rank2_a(int(params["ell"]))
    if family == "fold-b":
        ell = int(params["ell"])
        return fold(build_saito_a(2 * ell - 1), "b", ell)
    if family == "fold-i2":
        ell = int(params["ell"])
        return fold(build_saito_a(ell - 1), "i2", ell)
    raise KeyError("unknown model family %r" % (family,))
