"""Residue-based Frobenius data from a Landau-Ginzburg pair.

Critical points and canonical coordinates, the flat metric and rank-three
tensor by residues at the critical points, the intersection form (extra
1/lambda weight), and Saito flat coordinates for the type-A family by
inversion of the superpotential branch at infinity.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as ex


class DegenerateCriticalPointError(ValueError):
    """|lambda''| too small at a critical point (non semi-simple sample)."""


class DiscriminantError(ValueError):
    """A critical value is too close to zero or to another one."""


@dataclass
class CanonicalFrame:
    """Critical points grouped by critical value.

    points: one (q, u, eta_mu) triple per distinct critical value; eta_mu
    sums 1/lambda'' over the group (type-D superpotentials are even in x, so
    their critical points come in +-q pairs sharing one canonical value).
    members: all critical points backing each group entry.
    """
    points: list
    members: list

    def values(self):
        return [u for _, u, _ in self.points]


@dataclass
class TangentData:
    chart: tuple
    metric: np.ndarray
    tensor: np.ndarray | None = None

    @property
    def cometric(self):
        return np.linalg.inv(self.metric)

    @property
    def structure_constants(self):
        """c^mu_{ab} = metric^{-1} . tensor"""
        return np.einsum("mn,nab->mab", self.cometric, self.tensor)

    @property
    def condition_number(self):
        return np.linalg.cond(self.metric)


# ---------------------------------------------------------------------------
# critical-point solvers, one per curve shape


class PolyCurve:
    """lambda polynomial in x; coefficients are expressions (highest first)."""

    def __init__(self, coeff_exprs):
        self.coeff_exprs = coeff_exprs

    def critical_xs(self, point):
        coeffs = np.array([ex.evaluate(c, point) for c in self.coeff_exprs])
        return list(np.roots(np.polyder(coeffs)))


class PolyPoleCurve:
    """lambda = P(x) + s/x^2 (type D); critical points solve x^3 P' = 2s."""

    def __init__(self, coeff_exprs, s_expr):
        self.coeff_exprs = coeff_exprs
        self.s_expr = s_expr

    def critical_xs(self, point):
        p = np.array([ex.evaluate(c, point) for c in self.coeff_exprs])
        sval = ex.evaluate(self.s_expr, point)
        num = np.polymul(np.polyder(p), [1, 0, 0, 0])
        num = np.polyadd(num, [-2 * sval])
        roots = np.roots(num)
        return [r for r in roots if abs(r) > 1e-9]


class TrigCurve:
    """lambda = e^{-r x} prod (e^x - Y_a) / prod (e^x - U_m)^{k_m}.

    Critical points become roots of a polynomial in y = e^x; x = log y on
    the principal branch (the Frobenius data only depends on y).
    """

    def __init__(self, r, zero_exprs, pole_exprs=(), pole_mults=()):
        self.r = r
        self.zero_exprs = zero_exprs
        self.pole_exprs = tuple(pole_exprs)
        self.pole_mults = tuple(pole_mults)

    def critical_xs(self, point):
        ys = [cmath.exp(ex.evaluate(w, point)) for w in self.zero_exprs]
        us = [cmath.exp(ex.evaluate(u, point)) for u in self.pole_exprs]
        all_roots = ys + us
        prod_all = np.array([1.0 + 0j])
        for root in all_roots:
            prod_all = np.polymul(prod_all, [1.0, -root])
        num = -self.r * prod_all
        for i in range(len(ys)):
            partial = np.array([1.0 + 0j])
            for j, root in enumerate(all_roots):
                if j != i:
                    partial = np.polymul(partial, [1.0, -root])
            num = np.polyadd(num, np.polymul([1.0, 0.0], partial))
        for m in range(len(us)):
            partial = np.array([1.0 + 0j])
            for j, root in enumerate(all_roots):
                if j != len(ys) + m:
                    partial = np.polymul(partial, [1.0, -root])
            num = np.polyadd(num, -self.pole_mults[m] * np.polymul([1.0, 0.0], partial))
        return [cmath.log(y) for y in np.roots(num) if abs(y) > 1e-12]


class EllipticCurve:
    """Theta-based superpotential; critical points by Newton on lambda'."""

    def __init__(self, n_expected, tau_name="tau"):
        self.n_expected = n_expected
        self.tau_name = tau_name

    def critical_xs(self, point, dlam=None):
        lam1, lam2 = dlam
        tau = complex(point[self.tau_name])
        roots = []
        grid = 5
        for i in range(grid):
            for j in range(grid):
                z = (i + 0.5) / grid + tau * (j + 0.5) / grid
                z = _newton_root(lam1, lam2, point, z)
                if z is None:
                    continue
                z = _reduce_mod_lattice(z, tau)
                if all(abs(_reduce_mod_lattice(z - r, tau, centered=True)) > 1e-7
                       for r in roots):
                    roots.append(z)
        if len(roots) != self.n_expected:
            raise DegenerateCriticalPointError(
                "expected %d critical points on the torus, found %d"
                % (self.n_expected, len(roots)))
        return roots


def _newton_root(f_expr, fp_expr, point, z0, tries=60):
    z = z0
    pt = dict(point)
    for _ in range(tries):
        pt["x"] = z
        try:
            f = ex.evaluate(f_expr, pt)
            fp = ex.evaluate(fp_expr, pt)
        except ex.NumericDomainError:
            return None
        if abs(fp) < 1e-13:
            return None
        step = f / fp
        z = z - step
        if abs(step) < 1e-13:
            pt["x"] = z
            if abs(ex.evaluate(f_expr, pt)) < 1e-9:
                return z
            return None
    return None


def _reduce_mod_lattice(z, tau, centered=False):
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    if centered:
        a -= round(a)
        b -= round(b)
    else:
        a -= math.floor(a)
        b -= math.floor(b)
    return a + b * tau


# ---------------------------------------------------------------------------
# canonical frame


def critical_points(bundle, p, cluster_rel=1e-8, distinct_rel=1e-6):
    """Critical points, values and canonical metric entries of the bundle.

    Critical points sharing one critical value (within cluster_rel of the
    value scale) are grouped; groups closer than distinct_rel trip the
    semi-simplicity guard and signal the caller to resample.
    """
    point = dict(p)
    if isinstance(bundle.curve, EllipticCurve):
        dlam = (bundle.dlam("x"), bundle.dlam("x", "x"))
        xs = bundle.curve.critical_xs(point, dlam=dlam)
    else:
        xs = bundle.curve.critical_xs(point)
    lam = bundle.lam
    lam1 = bundle.dlam("x")
    lam2 = bundle.dlam("x", "x")
    entries = []
    for q in xs:
        pq = dict(point)
        for _ in range(3):  # Newton polish on top of the eigenvalue roots
            pq["x"] = q
            l1 = ex.evaluate(lam1, pq)
            l2 = ex.evaluate(lam2, pq)
            if abs(l2) < 1e-13:
                break
            q = q - l1 / l2
        pq["x"] = q
        l1 = ex.evaluate(lam1, pq)
        l2 = ex.evaluate(lam2, pq)
        u = ex.evaluate(lam, pq)
        if abs(l1) > 1e-10 * max(1.0, abs(l2)):
            raise DegenerateCriticalPointError(
                "root refinement failed: |lambda'(q)| = %.2e" % abs(l1))
        if abs(l2) < 1e-8:
            raise DegenerateCriticalPointError(
                "|lambda''(q)| = %.2e below guard" % abs(l2))
        entries.append((q, u, l2))
    scale = max(1.0, max(abs(u) for _, u, _ in entries))
    groups = []
    for q, u, l2 in entries:
        for g in groups:
            if abs(u - g[0][1]) < cluster_rel * scale:
                g.append((q, u, l2))
                break
        else:
            groups.append([(q, u, l2)])
    points = []
    for g in groups:
        q0, u0, _ = g[0]
        eta_mu = sum(1.0 / l2 for _, _, l2 in g)
        points.append((q0, u0, eta_mu))
    us = [u for _, u, _ in points]
    for i in range(len(us)):
        for j in range(i + 1, len(us)):
            if abs(us[i] - us[j]) < distinct_rel * scale:
                raise DiscriminantError(
                    "critical values %d and %d collide: |du| = %.2e"
                    % (i, j, abs(us[i] - us[j])))
    return CanonicalFrame(points=points, members=groups)


# ---------------------------------------------------------------------------
# residue metrics


def _deriv_values_at_roots(bundle, point, frame_members, chart_map=None):
    """lambda_alpha(q) for each root q, pushed to the requested chart."""
    names = bundle.param_names
    dexprs = [bundle.dlam(n) for n in names]
    rows = []
    for group in frame_members:
        for q, _, l2 in group:
            pq = dict(point)
            pq["x"] = q
            vals = np.array([ex.evaluate(d, pq) for d in dexprs])
            if chart_map is not None:
                vals = chart_map.T @ vals
            lam_val = ex.evaluate(bundle.lam, pq)
            rows.append((vals, l2, lam_val))
    return rows


def eta_residue(bundle, p, chart_map=None, chart_names=None, frame=None):
    """Flat metric and rank-three tensor at p by residues at critical points.

    chart_map (optional) is the matrix d(param)/d(chart) used to push the
    lambda-derivatives from the parameter frame to a flat chart.
    """
    frame = frame or critical_points(bundle, p)
    rows = _deriv_values_at_roots(bundle, dict(p), frame.members, chart_map)
    n = len(rows[0][0])
    eta = np.zeros((n, n), dtype=complex)
    ten = np.zeros((n, n, n), dtype=complex)
    for vals, l2, _ in rows:
        w = 1.0 / l2
        eta += w * np.einsum("a,b->ab", vals, vals)
        ten += w * np.einsum("a,b,c->abc", vals, vals, vals)
    names = tuple(chart_names or bundle.param_names)
    return TangentData(chart=names, metric=eta, tensor=ten)


def g_residue(bundle, p, chart_map=None, chart_names=None, frame=None,
              with_tensor=False):
    """Intersection form (and optionally the dual rank-three tensor) at p.

    Same residue sum as eta with an extra 1/lambda(q) weight; the dual
    tensor carries 1/lambda(q)^2 (residue calculus for log lambda).
    """
    frame = frame or critical_points(bundle, p)
    for _, u, _ in frame.points:
        if abs(u) < 1e-8:
            raise DiscriminantError("critical value %.2e inside guard" % abs(u))
    rows = _deriv_values_at_roots(bundle, dict(p), frame.members, chart_map)
    n = len(rows[0][0])
    gmat = np.zeros((n, n), dtype=complex)
    ten = np.zeros((n, n, n), dtype=complex) if with_tensor else None
    for vals, l2, lam_val in rows:
        w = 1.0 / (l2 * lam_val)
        gmat += w * np.einsum("a,b->ab", vals, vals)
        if with_tensor:
            ten += w / lam_val * np.einsum("a,b,c->abc", vals, vals, vals)
    names = tuple(chart_names or bundle.param_names)
    return TangentData(chart=names, metric=gmat, tensor=ten)


def canonical_diagonalization_residual(bundle, p, chart_map=None):
    """Transport eta to canonical coordinates; deviation from diag(eta_mu).

    The Jacobian row for the canonical value u_mu is lambda_alpha at a
    representative critical point of its group.
    """
    frame = critical_points(bundle, p)
    td = eta_residue(bundle, p, chart_map=chart_map, frame=frame)
    names = bundle.param_names
    dexprs = [bundle.dlam(n) for n in names]
    point = dict(p)
    jac = []
    for q, _, _ in frame.points:
        pq = dict(point)
        pq["x"] = q
        row = np.array([ex.evaluate(d, pq) for d in dexprs])
        if chart_map is not None:
            row = chart_map.T @ row
        jac.append(row)
    jac = np.array(jac)
    k = np.linalg.inv(jac)
    eta_can = k.T @ td.metric @ k
    target = np.diag([eta_mu for _, _, eta_mu in frame.points])
    return float(np.max(np.abs(eta_can - target)))


# ---------------------------------------------------------------------------
# Saito flat coordinates for the type-A family


_CHART_CACHE = {}


def saito_a_chart(ell):
    """Symbolic flat-coordinate polynomials for lambda = x^(l+1)+a1 x^(l-1)+...

    t_alpha(a) = -((l+1)/alpha) Res_inf lambda^{alpha/(l+1)} dx, expanded by
    the generalized binomial theorem, plus symbolic Jacobian and Hessians.
    """
    got = _CHART_CACHE.get(ell)
    if got is not None:
        return got
    h = ell + 1
    avars = ["a%d" % i for i in range(1, ell + 1)]
    tvars = ["v%d" % i for i in range(1, ell + 1)]
    texprs = []
    for alpha in range(1, ell + 1):
        q = Fraction(alpha, h)
        terms = []
        for combo in _weighted_compositions(ell, alpha + 1):
            j = sum(combo)
            coeff = _binom_frac(q, j) * Fraction(math.factorial(j))
            for c in combo:
                coeff /= math.factorial(c)
            factors = [ex.Const(complex(Fraction(h, alpha) * coeff))]
            for mu, c in enumerate(combo, start=1):
                if c:
                    factors.append(ex.pow_(ex.Var("a%d" % mu), c))
            terms.append(ex.mul(*factors))
        texprs.append(ex.add(*terms))
    jac = [[ex.differentiate(t, a) for a in avars] for t in texprs]
    hess = [[[ex.differentiate(jac[r][i], avars[j]) for j in range(ell)]
             for i in range(ell)] for r in range(ell)]
    chart = {"ell": ell, "avars": avars, "tvars": tvars,
             "t_exprs": texprs, "jac_exprs": jac, "hess_exprs": hess}
    _CHART_CACHE[ell] = chart
    return chart


def _weighted_compositions(ell, weight):
    """All (k_1..k_ell) with sum k_mu (mu+1) == weight, k_mu >= 0."""
    out = []

    def rec(mu, remaining, prefix):
        if mu > ell:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        step = mu + 1
        for k in range(remaining // step + 1):
            rec(mu + 1, remaining - k * step, prefix + [k])

    rec(1, weight, [])
    return [c for c in out if any(c)]


def _binom_frac(q, j):
    num = Fraction(1)
    for i in range(j):
        num *= q - i
    return num / math.factorial(j)


def flat_coords_A(ell, a_point):
    """t values, Jacobian dt/da and Hessians d2t/da2 at the parameter point."""
    if ell > 8:
        raise ValueError("truncation budget covers ell <= 8")
    chart = saito_a_chart(ell)
    pt = dict(a_point)
    t = np.array([ex.evaluate(e, pt) for e in chart["t_exprs"]])
    jac = np.array([[ex.evaluate(c, pt) for c in row] for row in chart["jac_exprs"]])
    hess = np.array([[[ex.evaluate(c, pt) for c in row] for row in mat]
                     for mat in chart["hess_exprs"]])
    return t, jac, hess


def invert_flat_map(ell, t_values, max_iter=50, tol=1e-13):
    """Newton inversion of the flat-coordinate map; initial guess a = t."""
    chart = saito_a_chart(ell)
    t_values = np.asarray(t_values, dtype=complex)
    a = t_values.copy()
    for _ in range(max_iter):
        pt = {name: a[i] for i, name in enumerate(chart["avars"])}
        tv = np.array([ex.evaluate(e, pt) for e in chart["t_exprs"]])
        resid = tv - t_values
        if np.max(np.abs(resid)) < tol:
            return a
        jac = np.array([[ex.evaluate(c, pt) for c in row]
                        for row in chart["jac_exprs"]])
        a = a - np.linalg.solve(jac, resid)
    raise RuntimeError("flat-map inversion did not converge in %d steps" % max_iter)


def chart_state(ell, a_values=None, t_values=None):
    """Bundle of (a, t, da/dv, d2a/dv2) used for chain-ruling derivatives.

    da/dv is the inverse Jacobian; the Hessian of the inverse map follows
    from differentiating J . da/dv = id.
    """
    if a_values is None:
        a_values = invert_flat_map(ell, t_values)
    a_values = np.asarray(a_values, dtype=complex)
    chart = saito_a_chart(ell)
    apt = {name: a_values[i] for i, name in enumerate(chart["avars"])}
    t, jac, hess = flat_coords_A(ell, apt)
    jinv = np.linalg.inv(jac)
    # d2a_s/dv_a dv_b = - jinv[s,r] hess[r,m,n] jinv[m,a] jinv[n,b]
    hess_inv = -np.einsum("sr,rmn,ma,nb->sab", jinv, hess, jinv, jinv)
    return {"ell": ell, "a": a_values, "t": t, "da_dv": jinv, "dt_da": jac,
            "d2a_dv2": hess_inv, "avars": chart["avars"], "tvars": chart["tvars"]}
