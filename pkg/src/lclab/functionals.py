"""Moment and duality functionals of log-concave functions.

Three evaluation routes share one result shape:

* closed: exact formulas for the builtin families, valid under the full
  transform metadata (tilts included where the family stays closed);
* grid: support-restricted trapezoid sums on a lattice (dim <= 3);
* mc: seeded importance sampling (dim <= 8).

Entropy here is h(f) = -int f log f / int f, i.e. the mean of the potential
under the probability measure f/int f; the varentropy V(f) is its variance.
Both are invariant under translation and under rescaling f(ax).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateError,
    DivergentTiltError,
    InputError,
    NonConvergenceError,
    SanityError,
)
from .funcspace import (
    TAIL_GAP,
    LogConcaveFn,
    discretize,
    materialize,
    tilt_translate,
)
from .legendre import closed_polar_available, polar
from .quadrature import analyze, mc_moments, tilted_analyze

_SEPARABLE = ("f0", "f1", "f_inf", "gaussian")


class SpdMatrix:
    """Symmetric matrix with cached eigendecomposition helpers."""

    def __init__(self, mat):
        self.mat = 0.5 * (np.asarray(mat, dtype=float) + np.asarray(mat, dtype=float).T)
        self._eig = None

    @property
    def eig(self):
        if self._eig is None:
            self._eig = np.linalg.eigh(self.mat)
        return self._eig

    def lambda_min(self):
        return float(self.eig[0][0])

    def logdet(self):
        w = self.eig[0]
        if np.any(w <= 0):
            raise DegenerateError("matrix is not positive definite")
        return float(np.sum(np.log(w)))

    def det(self):
        return float(np.prod(self.eig[0]))

    def inv(self):
        w, v = self.eig
        if np.any(w <= 0):
            raise DegenerateError("matrix is not positive definite")
        return (v / w) @ v.T


@dataclass
class CoreMoments:
    """Route-independent raw integrals (log partition, measure moments)."""

    logZ: float
    bar: np.ndarray
    cov: np.ndarray
    mean_phi: float
    var_phi: float
    min_phi: float
    method: str = "closed"
    se_logZ: float | None = None


@dataclass
class MomentReport:
    """Moment functionals of one function.

    ``L`` uses the sup of f, ``L_tilde`` the value at the barycenter, and
    ``L_hat`` the entropy; all three coincide for centered gaussians.
    """

    integral: float
    barycenter: np.ndarray
    covariance: np.ndarray
    entropy: float
    varentropy: float
    L: float
    L_tilde: float
    L_hat: float
    log_integral: float = 0.0
    max_value: float = 1.0
    method: str = "closed"
    se_logZ: float | None = None

    def to_dict(self):
        return {
            "integral": self.integral,
            "barycenter": np.asarray(self.barycenter).tolist(),
            "covariance": np.asarray(self.covariance).tolist(),
            "entropy": self.entropy,
            "varentropy": self.varentropy,
            "L": self.L,
            "L_tilde": self.L_tilde,
            "L_hat": self.L_hat,
        }


# ---------------------------------------------------------------------------
# closed route: separable families
# ---------------------------------------------------------------------------


def _axis_prims(name, t, v, sigma2=1.0):
    """Per-axis (lam, E[w], Var[w], E[phi_ax], Var[phi_ax], min phi_ax).

    The axis carries phi_ax(w) = t*psi(w) + v*w; lam = log int e^{-phi_ax}.
    """
    if name == "f0":
        b = t + v
        if b <= 0:
            raise DivergentTiltError(f"f0 axis needs tilt > -power, got rate {b:.3g}")
        return (b - math.log(b), 1.0 / b - 1.0, 1.0 / b**2, 1.0 - b, 1.0, -b)
    if name == "f1":
        if abs(v) >= t:
            raise DivergentTiltError(f"f1 axis needs |tilt| < power, got {v:.3g} vs {t:.3g}")
        d = t * t - v * v
        lam = math.log(2.0 * t / d)
        ex = -2.0 * v / d
        varx = 2.0 * (t * t + v * v) / d**2
        return (lam, ex, varx, 1.0, 1.0, 0.0)
    if name == "f_inf":
        if abs(v) < 1e-4:
            v2 = v * v
            lam = math.log(2.0) + v2 / 6.0 - v2 * v2 / 180.0
            ex = -v / 3.0 + v**3 / 45.0
            varx = 1.0 / 3.0 - v2 / 15.0
        else:
            lam = math.log(2.0 * math.sinh(v) / v)
            ex = 1.0 / v - math.cosh(v) / math.sinh(v)
            varx = 1.0 / v**2 - 1.0 / math.sinh(v) ** 2
        return (lam, ex, varx, v * ex, v * v * varx, -abs(v))
    if name == "gaussian":
        lam = 0.5 * math.log(2.0 * math.pi * sigma2 / t) + sigma2 * v * v / (2.0 * t)
        ex = -sigma2 * v / t
        return (lam, ex, sigma2 / t, 0.5 - sigma2 * v * v / (2.0 * t), 0.5, -sigma2 * v * v / (2.0 * t))
    raise InputError(f"no separable closed form for {name!r}")


def _separable_core(f):
    t, a, c = f.power, f.scale, f.offset
    s2 = f.params.get("sigma2", 1.0)
    logZ = -c
    bar = np.empty(f.dim)
    var = np.empty(f.dim)
    mean_phi = c
    var_phi = 0.0
    min_phi = c
    for i in range(f.dim):
        q = f.tilt[i]
        lam, ex, vx, ep, vp, mp = _axis_prims(f.name, t, q / a, s2)
        logZ += lam - math.log(abs(a)) - q * f.shift[i]
        bar[i] = f.shift[i] + ex / a
        var[i] = vx / (a * a)
        mean_phi += ep + q * f.shift[i]
        var_phi += vp
        min_phi += mp + q * f.shift[i]
    return CoreMoments(logZ, bar, np.diag(var), mean_phi, var_phi, min_phi)


# ---------------------------------------------------------------------------
# closed route: piecewise-linear potentials (1D)
# ---------------------------------------------------------------------------


def _pl_canonical(f):
    """Fold all transform metadata into plain 1D knot data in z coordinates."""
    if f.name == "counterexample":
        xs = np.array([-1.0, 1.0])
        ps = np.array([0.0, 0.0])
        ls, rs = -1.0, 1.0
    else:
        p = f.params
        xs = np.asarray(p["knots_x"], dtype=float)
        ps = np.asarray(p["knots_phi"], dtype=float)
        ls = p.get("left_slope")
        rs = p.get("right_slope")
    t, a, u, c = f.power, f.scale, float(f.tilt[0]), f.offset
    s = float(f.shift[0])
    zs = s + xs / a
    if a < 0:
        zs = zs[::-1]
        pvals = ps[::-1]
        lo_w, hi_w = rs, ls
    else:
        pvals = ps
        lo_w, hi_w = ls, rs
    pz = t * pvals + u * zs + c
    lslope = None if lo_w is None else t * a * lo_w + u
    rslope = None if hi_w is None else t * a * hi_w + u
    return zs, pz, lslope, rslope


def _j012(L, m):
    """J_k = int_0^L s^k e^{-m s} ds for k = 0, 1, 2 (L may be inf, m > 0)."""
    if math.isinf(L):
        return 1.0 / m, 1.0 / m**2, 2.0 / m**3
    x = m * L
    if abs(x) < 1e-4:
        j0 = L * (1.0 - x / 2.0 + x * x / 6.0 - x**3 / 24.0)
        j1 = L * L * (0.5 - x / 3.0 + x * x / 8.0 - x**3 / 30.0)
        j2 = L**3 * (1.0 / 3.0 - x / 4.0 + x * x / 10.0 - x**3 / 36.0)
        return j0, j1, j2
    em = math.exp(-x)
    return (
        (1.0 - em) / m,
        (1.0 - (1.0 + x) * em) / m**2,
        (2.0 - (2.0 + 2.0 * x + x * x) * em) / m**3,
    )


def _pl_core(f):
    zs, ps, lslope, rslope = _pl_canonical(f)
    if rslope is not None and rslope <= 0:
        raise DivergentTiltError("right tail of the potential does not increase")
    if lslope is not None and lslope >= 0:
        raise DivergentTiltError("left tail of the potential does not increase")
    m0 = float(np.min(ps))
    acc = np.zeros(5)  # Z, x, x^2, phi, phi^2 sums with weight e^{-(phi - m0)}

    def piece(z0, d, L, p_start, slope):
        # phi(s) = p_start + slope * s along z = z0 + d*s, s in [0, L]
        j0, j1, j2 = _j012(L, slope)
        w = math.exp(-(p_start - m0))
        acc[0] += w * j0
        acc[1] += w * (z0 * j0 + d * j1)
        acc[2] += w * (z0 * z0 * j0 + 2.0 * d * z0 * j1 + j2)
        acc[3] += w * (p_start * j0 + slope * j1)
        acc[4] += w * (p_start**2 * j0 + 2.0 * p_start * slope * j1 + slope**2 * j2)

    for i in range(len(zs) - 1):
        L = zs[i + 1] - zs[i]
        m = (ps[i + 1] - ps[i]) / L
        if m >= 0:
            piece(zs[i], 1.0, L, ps[i], m)
        else:
            piece(zs[i + 1], -1.0, L, ps[i + 1], -m)
    if rslope is not None:
        piece(zs[-1], 1.0, math.inf, ps[-1], rslope)
    if lslope is not None:
        piece(zs[0], -1.0, math.inf, ps[0], -lslope)
    Z, Sx, Sx2, Sp, Sp2 = acc
    if Z <= 0:
        raise DegenerateError("piecewise potential carries no mass")
    bar = Sx / Z
    var = Sx2 / Z - bar * bar
    ep = Sp / Z
    vp = Sp2 / Z - ep * ep
    return CoreMoments(
        math.log(Z) - m0, np.array([bar]), np.array([[var]]), ep, vp, m0
    )


# ---------------------------------------------------------------------------
# closed route: bodies and their cone lifts
# ---------------------------------------------------------------------------


def _indicator_core(f):
    if np.any(f.tilt != 0):
        return None
    st = f.params["body"].stats()
    n, a, c = f.dim, f.scale, f.offset
    logZ = math.log(st.volume) - n * math.log(abs(a)) - c
    bar = f.shift + np.asarray(st.barycenter) / a
    cov = np.asarray(st.covariance) / (a * a)
    return CoreMoments(logZ, bar, cov, c, 0.0, c, se_logZ=st.se_volume)


def _cone_core(f):
    if np.any(f.tilt != 0):
        return None
    body = f.params["body"]
    st = body.stats()
    n = body.dim
    t, a, c = f.power, f.scale, f.offset
    er = (n + 1) / t
    er2 = (n + 1) * (n + 2) / t**2
    varr = (n + 1) / t**2
    bu = np.asarray(st.barycenter)
    cu = np.asarray(st.covariance)
    logZw = math.log(st.volume) + math.lgamma(n + 1) - (n + 1) * math.log(t) + t * (n + 1)
    barw = np.append(er * bu, er - (n + 1))
    cov = np.zeros((n + 1, n + 1))
    cov[:n, :n] = er2 * cu + varr * np.outer(bu, bu)
    cov[:n, n] = cov[n, :n] = varr * bu
    cov[n, n] = varr
    logZ = logZw - (n + 1) * math.log(abs(a)) - c
    return CoreMoments(
        logZ,
        f.shift + barw / a,
        cov / (a * a),
        (n + 1) * (1.0 - t) + c,
        float(n + 1),
        -t * (n + 1) + c,
        se_logZ=st.se_volume,
    )


def _closed_core(f):
    """Exact moments when the descriptor family admits them, else None."""
    if f.kind != "builtin":
        return None
    if f.name in _SEPARABLE:
        return _separable_core(f)
    if f.name in ("counterexample", "custom_piecewise"):
        return _pl_core(f)
    if f.name == "indicator_body":
        return _indicator_core(f)
    if f.name == "cone_lift":
        return _cone_core(f)
    return None


# ---------------------------------------------------------------------------
# grid defaults
# ---------------------------------------------------------------------------

_DEFAULT_COUNTS = {1: 4001, 2: 801, 3: 121}


def suggest_grid(f, counts=None, margin=None):
    """Heuristic (box, spacing) covering the effective support of f.

    The box reaches potential level min phi + margin (default TAIL_GAP + 5)
    along each axis, hard support edges land on nodes, and indicator-style
    supports get one padding cell of +inf so the boundary criterion holds.
    """
    counts = counts or _DEFAULT_COUNTS.get(f.dim)
    if counts is None:
        raise InputError("no default grid beyond dim 3")
    m = (TAIL_GAP + 5.0) if margin is None else float(margin)
    t, a = f.power, f.scale
    pad = [(False, False)] * f.dim
    w_box = []
    name = f.name if f.kind == "builtin" else None
    if name in _SEPARABLE:
        s2 = f.params.get("sigma2", 1.0)
        for i in range(f.dim):
            v = f.tilt[i] / a
            if name == "f0":
                b = t + v
                if b <= 0:
                    raise DivergentTiltError("tilt outside the integrability domain")
                w_box.append((-1.0, -1.0 + m / b))
                pad[i] = (True, False) if a > 0 else (False, True)
            elif name == "f1":
                if abs(v) >= t:
                    raise DivergentTiltError("tilt outside the integrability domain")
                w_box.append((-m / (t - v), m / (t + v)))
            elif name == "f_inf":
                w_box.append((-1.0, 1.0))
                pad[i] = (True, True)
            else:
                ctr = -v * s2 / t
                r = math.sqrt(2.0 * s2 * m / t)
                w_box.append((ctr - r, ctr + r))
    elif name in ("counterexample", "custom_piecewise"):
        zs, ps, ls, rs = _pl_canonical(f)
        pmin = float(np.min(ps))
        lo, hi = float(zs[0]), float(zs[-1])
        if ls is not None:
            if ls >= 0:
                raise DivergentTiltError("left tail of the potential does not increase")
            lo -= (pmin + m - ps[0]) / (-ls)
        if rs is not None:
            if rs <= 0:
                raise DivergentTiltError("right tail of the potential does not increase")
            hi += (pmin + m - ps[-1]) / rs
        if ls is None and rs is None:
            pad[0] = (True, True)
        elif ls is None:
            pad[0] = (True, False)
        elif rs is None:
            pad[0] = (False, True)
        box = np.array([[lo, hi]])
        return _finish_box(f, box, None, counts, pad)
    elif name == "indicator_body":
        bb = f.params["body"].bounding_box()
        w_box = [tuple(bb[i]) for i in range(f.dim)]
        pad = [(True, True)] * f.dim
    elif name == "cone_lift":
        return _cone_grid(f, counts, m)
    elif f.kind == "grid":
        g = materialize(f)
        return g.box(), g.spacing
    else:
        raise InputError(f"no grid default for {f.name!r}")
    box = np.array([sorted((f.shift[i] + w[0] / a, f.shift[i] + w[1] / a))
                    for i, w in enumerate(w_box)])
    return _finish_box(f, box, None, counts, pad)


def _finish_box(f, box, spacing, counts, pad):
    if spacing is None:
        spacing = (box[:, 1] - box[:, 0]) / (counts - 1)
    spacing = np.asarray(spacing, dtype=float)
    box = box.astype(float).copy()
    for i, (lo, hi) in enumerate(pad):
        if lo:
            box[i, 0] -= spacing[i]
        if hi:
            box[i, 1] += spacing[i]
    return box, spacing


def _cone_grid(f, counts, m):
    """Shared-spacing lattice for cone lifts: support edges stay on nodes."""
    body = f.params["body"]
    n = body.dim
    t, a = f.power, f.scale
    r = (n + 1.0) / t
    for _ in range(8):
        r = ((n + 1) + m + n * max(0.0, math.log(r * t / max(n, 1)))) / t
    bb = body.bounding_box()
    radius = float(np.max(np.abs(bb)))
    h = r / (counts - 1)
    # commensurate spacing: the apex level w = 0 and the +-h*k slant crossings
    # sit on nodes, which restores second-order accuracy at the support edge
    h = (n + 1.0) / math.ceil((n + 1.0) / h)
    r = math.ceil(r / h) * h
    half = math.ceil(r * radius / h) * h
    box_w = [(-half, half)] * n + [(-(n + 1.0), r - (n + 1.0))]
    box = np.sort(
        np.array([(f.shift[i] + lo / a, f.shift[i] + hi / a) for i, (lo, hi) in enumerate(box_w)]),
        axis=1,
    )
    pad = [(True, True)] * n + [((True, False) if a > 0 else (False, True))]
    return _finish_box(f, box, np.full(n + 1, h / abs(a)), counts, pad)


# ---------------------------------------------------------------------------
# the moments entry point
# ---------------------------------------------------------------------------


def _grid_core(f, box=None, spacing=None):
    if f.kind == "grid":
        grid = materialize(f)
    else:
        if box is None or spacing is None:
            dbox, dspace = suggest_grid(f)
            box = dbox if box is None else box
            spacing = dspace if spacing is None else spacing
        grid = discretize(f, box, spacing)
    res = analyze(grid)
    return CoreMoments(
        res.logZ, res.bar, res.cov, res.mean_phi, res.var_phi, res.min_phi,
        method="grid",
    )


def _mc_core(f, samples, seed, refine):
    res = mc_moments(f, samples=samples, seed=seed, refine=refine)
    return CoreMoments(
        res.logZ, res.bar, res.cov, res.mean_phi, res.var_phi, res.min_phi,
        method="mc", se_logZ=res.se_logZ,
    )


def _core(f, method="auto", box=None, spacing=None, samples=200_000, seed=None, refine=2):
    if method not in ("auto", "closed", "grid", "mc"):
        raise InputError(f"unknown method {method!r}")
    if method in ("auto", "closed"):
        core = _closed_core(f)
        if core is not None:
            return core
        if method == "closed":
            raise InputError("no closed moment formulas for this descriptor")
    if method == "grid" or (method == "auto" and f.dim <= 3):
        return _grid_core(f, box, spacing)
    if f.dim > 8:
        raise InputError("Monte Carlo moments support dim <= 8")
    return _mc_core(f, samples, seed, refine)


def _report(f, core):
    n = f.dim
    cov = SpdMatrix(core.cov)
    logdet = cov.logdet()
    half = logdet / (2.0 * n)
    log_L = (-core.min_phi - core.logZ) / n + half
    phibar = float(f.phi(core.bar))
    log_Lt = (-phibar - core.logZ) / n + half
    log_Lh = (-core.mean_phi - core.logZ) / n + half
    return MomentReport(
        integral=math.exp(core.logZ),
        barycenter=core.bar,
        covariance=cov.mat,
        entropy=core.mean_phi,
        varentropy=core.var_phi,
        L=math.exp(log_L),
        L_tilde=math.exp(log_Lt),
        L_hat=math.exp(log_Lh),
        log_integral=core.logZ,
        max_value=math.exp(-core.min_phi),
        method=core.method,
        se_logZ=core.se_logZ,
    )


def moments(f, method="auto", box=None, spacing=None, samples=200_000, seed=None, refine=2):
    """Moment report of f: integral, barycenter, covariance, entropy,
    varentropy, and the three isotropic-constant variants.

    Parameters
    ----------
    f : LogConcaveFn
    method : {"auto", "closed", "grid", "mc"}
        auto prefers closed formulas, then a grid (dim <= 3), then Monte
        Carlo (dim <= 8).
    box, spacing : optional grid overrides (defaults via ``suggest_grid``).
    samples, seed, refine : Monte Carlo controls.
    """
    return _report(f, _core(f, method, box, spacing, samples, seed, refine))


def jensen_gaps(f, **kw):
    """Nonnegative Jensen gaps (e^{-h} - maxf e^{-n}, f(bar) - e^{-h}).

    The sandwich maxf * e^{-n} <= e^{-h(f)} <= f(barycenter) holds for every
    log-concave f; equality on the left needs f0-type extremals, on the right
    indicator-type ones.
    """
    core = _core(f, **kw)
    eh = math.exp(-core.mean_phi)
    lower = eh - math.exp(-core.min_phi) * math.exp(-f.dim)
    upper = float(np.exp(-f.phi(core.bar))) - eh
    return lower, upper


# ---------------------------------------------------------------------------
# log-Laplace transform
# ---------------------------------------------------------------------------


def log_laplace(f, x, method="auto", grid=None, box=None, spacing=None):
    """Lambda_f(x) = log int f(z) e^{-<x,z>} dz with gradient and Hessian.

    grad = -barycenter and hess = covariance of the tilted function, so the
    three outputs are mutually consistent on any route (on a fixed grid they
    agree with finite differences of the value up to truncation order).

    Pass ``grid`` (a GridFn) to evaluate several tilts on one fixed lattice.
    """
    x = np.broadcast_to(np.asarray(x, dtype=float), (f.dim,))
    if grid is not None:
        res = tilted_analyze(grid, x)
        return res.logZ, -res.bar, res.cov
    if method in ("auto", "closed"):
        core = _closed_core(tilt_translate(f, 0.0, x))
        if core is not None:
            return core.logZ, -core.bar, core.cov
        if method == "closed":
            raise InputError("no closed log-Laplace for this descriptor")
    if f.dim > 3:
        raise InputError("grid log-Laplace supports dim <= 3; pass a closed family")
    if f.kind == "grid":
        g = materialize(f)
    else:
        if box is None or spacing is None:
            b, s = suggest_grid(f)
            box = b if box is None else box
            spacing = s if spacing is None else spacing
        g = discretize(f, box, spacing)
    res = tilted_analyze(g, x)
    return res.logZ, -res.bar, res.cov


# ---------------------------------------------------------------------------
# Mahler products and the Santalo point
# ---------------------------------------------------------------------------


@dataclass
class MahlerResult:
    product: float
    log_product: float
    integral: float
    integral_polar: float


def mahler(f, method="auto", box=None, spacing=None, dual_axes=None, **kw):
    """Volume product M(f) = int f * int f-polar at the current position."""
    cf = _core(f, method=method, box=box, spacing=spacing, **kw)
    pf = polar(f) if closed_polar_available(f) else polar(f, box=box, spacing=spacing, dual_axes=dual_axes)
    cp = _core(pf, method=method)
    lp = cf.logZ + cp.logZ
    return MahlerResult(math.exp(lp), lp, math.exp(cf.logZ), math.exp(cp.logZ))


@dataclass
class SantaloResult:
    point: np.ndarray
    volume_product: float
    log_volume_product: float
    converged: bool
    iterations: int
    grad_norm: float


def santalo_point(f, box=None, spacing=None, dual_axes=None, tol=1e-8, maxiter=100):
    """Translate center minimizing the volume product, via Newton descent.

    Minimizes Lambda_{f-polar} with damped Newton steps (Hessian regularized
    by 1e-12 * mean eigenvalue, Armijo halving). The translation s of f that
    attains the minimum is the negated argmin, so the point is equivariant:
    shifting f by a shifts the point by a. A run that exhausts ``maxiter``
    returns converged=False rather than raising.
    """
    if closed_polar_available(f):
        pf = polar(f)
        pf_grid = None
    else:
        pf = polar(f, box=box, spacing=spacing, dual_axes=dual_axes)
        pf_grid = materialize(pf)

    def lap(xv):
        return log_laplace(pf, xv, grid=pf_grid)

    n = f.dim
    x = np.zeros(n)
    val, g, H = lap(x)
    it = 0
    for it in range(1, maxiter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= tol * (1.0 + float(np.linalg.norm(x))):
            break
        reg = 1e-12 * max(float(np.trace(H)) / n, 1.0)
        try:
            step = np.linalg.solve(H + reg * np.eye(n), -g)
        except np.linalg.LinAlgError:
            step = -g
        alpha = 1.0
        slope = float(g @ step)
        moved = False
        for _ in range(60):
            trial = x + alpha * step
            try:
                val_t, g_t, H_t = lap(trial)
            except DivergentTiltError:
                alpha *= 0.5
                continue
            if val_t <= val + 1e-4 * alpha * slope or alpha < 1e-14:
                x, val, g, H = trial, val_t, g_t, H_t
                moved = True
                break
            alpha *= 0.5
        if not moved:
            break
    gn = float(np.linalg.norm(g))
    conv = gn <= tol * (1.0 + float(np.linalg.norm(x)))
    cf = _core(f, method="auto", box=box, spacing=spacing)
    logP = cf.logZ + val
    return SantaloResult(-x, math.exp(logP), logP, conv, it, gn)


def volume_product(f, sanity=True, **kw):
    """Santalo-minimized volume product P(f) = min_s int f * int (f_s)-polar.

    Raises NonConvergenceError (with the best iterate attached) if the Newton
    run does not meet tolerance, and SanityError if the product exceeds the
    gaussian value (2 pi)^n by more than 1%.
    """
    res = santalo_point(f, **kw)
    if not res.converged:
        raise NonConvergenceError(
            f"Santalo search stopped at gradient norm {res.grad_norm:.3g}",
            best=res,
        )
    bound = f.dim * math.log(2.0 * math.pi)
    if sanity and res.log_volume_product > bound + math.log(1.01):
        raise SanityError(
            f"volume product {res.volume_product:.6g} exceeds the gaussian "
            f"maximum {math.exp(bound):.6g} by more than 1%"
        )
    return res
