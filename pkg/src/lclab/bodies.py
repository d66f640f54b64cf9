"""Convex bodies, their moment statistics, and section-scaled constructions.

Named bodies (cube, ball, cross_polytope, simplex) have closed volume,
covariance, and gauge; the simplex is the centered regular-volume one with
vertices e_i - c and -c for c = (1,...,1)/(n+1). A vertex_polytope carries up
to 16 vertices with the origin strictly inside; its gauge comes from the
facet inequalities of the convex hull and its statistics from an exact
simplex decomposition (Monte Carlo rejection is kept as a cross-check).

``ConcaveProfile`` represents a nonnegative concave section-scaling g. The
body K(C, g) = {(x, y) : x in g(y) * C} has block moments

    vol = vol(C) * int g^m,   Cov = diag( (int g^{m+2} / int g^m) Cov(C),
                                          Cov(g^m dy) ),

with m = dim C, which is what ``km_isoconst`` checks against direct
quadrature, and what drives the ``km_limit_sweep`` toward the entropic
isotropic constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, InputError
from .funcspace import GridFn, LogConcaveFn, make_builtin
from .quadrature import analyze

NAMED_KINDS = ("cube", "ball", "cross_polytope", "simplex")
MAX_VERTICES = 16


@dataclass
class BodyStats:
    volume: float
    barycenter: np.ndarray
    covariance: np.ndarray
    method: str = "closed"
    se_volume: float | None = None
    samples: int | None = None


@dataclass(eq=False)
class Body:
    kind: str
    dim: int
    vertices: np.ndarray | None = None
    _facets: tuple = field(default=None, repr=False, compare=False)
    _stats: dict = field(default_factory=dict, repr=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, Body):
            return NotImplemented
        if (self.kind, self.dim) != (other.kind, other.dim):
            return False
        if self.vertices is None or other.vertices is None:
            return self.vertices is other.vertices
        return np.array_equal(self.vertices, other.vertices)

    def __post_init__(self):
        if self.kind not in NAMED_KINDS + ("vertex_polytope",):
            raise InputError(f"unknown body kind {self.kind!r}")
        if self.dim < 1:
            raise InputError("body dim must be >= 1")
        if self.kind == "vertex_polytope":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[0] < self.dim + 1 or v.shape[1] != self.dim:
                raise InputError("vertex_polytope needs >= dim+1 vertices of the stated dim")
            if v.shape[0] > MAX_VERTICES:
                raise InputError(f"vertex_polytope supports at most {MAX_VERTICES} vertices")
            if not np.all(np.isfinite(v)):
                raise InputError("vertices must be finite")
            self.vertices = v
            self._facets = self._hull_facets()
        elif self.vertices is not None:
            raise InputError(f"{self.kind} takes no vertex list")

    # -- geometry -----------------------------------------------------------

    def _hull_facets(self):
        from scipy.spatial import ConvexHull, QhullError

        try:
            hull = ConvexHull(self.vertices)
        except QhullError as exc:
            raise InputError(f"vertices do not span dimension {self.dim}: {exc}") from exc
        A = hull.equations[:, :-1]
        b = hull.equations[:, -1]
        # inside iff A x + b <= 0; the origin must be strictly interior
        if np.any(b > -1e-12):
            raise InputError("vertex_polytope must contain the origin strictly inside")
        return A, -b, hull.volume

    def gauge(self, x):
        """Minkowski gauge ||x||_K, vectorized over leading axes."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise InputError(f"gauge expects points with last axis {self.dim}")
        if self.kind == "cube":
            return np.max(np.abs(x), axis=-1)
        if self.kind == "ball":
            return np.linalg.norm(x, axis=-1)
        if self.kind == "cross_polytope":
            return np.abs(x).sum(axis=-1)
        if self.kind == "simplex":
            n = self.dim
            return (n + 1.0) * np.maximum(-np.min(x, axis=-1), x.sum(axis=-1))
        A, r, _ = self._facets
        return np.max((x @ A.T) / r, axis=-1)

    def vertex_array(self):
        """Vertices of the body (None for the ball)."""
        n = self.dim
        if self.kind == "vertex_polytope":
            return self.vertices
        if self.kind == "cube":
            if n > 12:
                raise InputError("cube vertex enumeration is capped at dim 12")
            corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij"))
            return corners.reshape(n, -1).T
        if self.kind == "cross_polytope":
            return np.vstack([np.eye(n), -np.eye(n)])
        if self.kind == "simplex":
            c = np.full(n, 1.0 / (n + 1))
            return np.vstack([np.eye(n) - c, -c])
        return None

    def bounding_box(self):
        v = self.vertex_array() if self.kind != "ball" else None
        if v is None:
            return np.stack([-np.ones(self.dim), np.ones(self.dim)], axis=1)
        return np.stack([v.min(axis=0), v.max(axis=0)], axis=1)

    # -- statistics ---------------------------------------------------------

    def stats(self, method="auto", samples=10_000_000, seed=1234):
        """Volume, barycenter, covariance.

        method "auto" uses closed forms for named bodies and the exact
        simplex-decomposition for vertex polytopes; "mc" forces seeded
        rejection sampling (with a volume standard error), kept around as an
        independent cross-check of the exact path.
        """
        key = (method if method == "mc" else "auto", seed if method == "mc" else None)
        if key not in self._stats:
            if method == "mc":
                self._stats[key] = self._mc_stats(samples, seed)
            elif self.kind == "vertex_polytope":
                self._stats[key] = self._decomposition_stats()
            else:
                self._stats[key] = self._closed_stats()
        return self._stats[key]

    def _closed_stats(self):
        n = self.dim
        if self.kind == "cube":
            return BodyStats(2.0**n, np.zeros(n), np.eye(n) / 3.0)
        if self.kind == "ball":
            vol = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
            return BodyStats(vol, np.zeros(n), np.eye(n) / (n + 2.0))
        if self.kind == "cross_polytope":
            vol = 2.0**n / math.factorial(n)
            return BodyStats(vol, np.zeros(n), np.eye(n) * 2.0 / ((n + 1.0) * (n + 2.0)))
        # centered simplex: Dirichlet(1,...,1) coordinates shifted to mean 0
        vol = 1.0 / math.factorial(n)
        cov = ((n + 1.0) * np.eye(n) - 1.0) / ((n + 1.0) ** 2 * (n + 2.0))
        return BodyStats(vol, np.zeros(n), cov)

    def _decomposition_stats(self):
        from scipy.spatial import Delaunay

        tri = Delaunay(self.vertices)
        n = self.dim
        vol_total = 0.0
        bar_acc = np.zeros(n)
        sec_acc = np.zeros((n, n))
        for simplex in tri.simplices:
            vs = self.vertices[simplex]
            edges = vs[1:] - vs[0]
            vol = abs(np.linalg.det(edges)) / math.factorial(n)
            if vol == 0.0:
                continue
            c = vs.mean(axis=0)
            centered = vs - c
            cov = centered.T @ centered / ((n + 1.0) * (n + 2.0))
            vol_total += vol
            bar_acc += vol * c
            sec_acc += vol * (cov + np.outer(c, c))
        if vol_total <= 0:
            raise DegenerateError("polytope has zero volume")
        bar = bar_acc / vol_total
        cov = sec_acc / vol_total - np.outer(bar, bar)
        return BodyStats(vol_total, bar, cov, method="decomposition")

    def _mc_stats(self, samples, seed):
        rng = np.random.default_rng(seed)
        bb = self.bounding_box()
        widths = bb[:, 1] - bb[:, 0]
        box_vol = float(np.prod(widths))
        n = self.dim
        hits = 0
        bar_acc = np.zeros(n)
        sec_acc = np.zeros((n, n))
        chunk = 1_000_000
        done = 0
        while done < samples:
            k = min(chunk, samples - done)
            pts = bb[:, 0] + rng.random((k, n)) * widths
            inside = self.gauge(pts) <= 1.0
            acc = pts[inside]
            hits += len(acc)
            bar_acc += acc.sum(axis=0)
            sec_acc += acc.T @ acc
            done += k
        if hits == 0:
            raise DegenerateError("rejection sampler never hit the body")
        p = hits / samples
        vol = box_vol * p
        se = box_vol * math.sqrt(p * (1.0 - p) / samples)
        bar = bar_acc / hits
        cov = sec_acc / hits - np.outer(bar, bar)
        return BodyStats(vol, bar, cov, method="mc", se_volume=se, samples=samples)

    def isotropic_constant(self):
        """L_K = det(Cov K)^{1/2n} / vol(K)^{1/n}."""
        st = self.stats()
        sign, logdet = np.linalg.slogdet(st.covariance)
        if sign <= 0:
            raise DegenerateError("body covariance is not positive definite")
        return math.exp(logdet / (2.0 * self.dim) - math.log(st.volume) / self.dim)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "vertices": None if self.vertices is None else self.vertices.tolist(),
        }


def make_body(kind, dim=None, vertices=None):
    if kind == "vertex_polytope":
        v = np.asarray(vertices, dtype=float)
        return Body("vertex_polytope", v.shape[1] if dim is None else int(dim), v)
    if dim is None:
        raise InputError(f"body kind {kind!r} requires a dim")
    return Body(kind, int(dim))


def body_from_dict(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise InputError("body descriptor must be a dict with a 'kind'")
    return make_body(d["kind"], d.get("dim"), d.get("vertices"))


def indicator(body):
    """The indicator function of a body as a LogConcaveFn."""
    return make_builtin("indicator_body", body.dim, body=body)


def cone_lift(body):
    """The cone lift f(x, s) = e^{-s} 1{||x||_K <= s + n + 1} over K.

    Its barycenter sits at the origin and its entropic isotropic constant is

        L_hat = (n+2)^{n/(2(n+1))} sqrt(n+1) / (e (n!)^{1/(n+1)}) * L_K^{n/(n+1)},

    which equals 1/e exactly when K is a simplex.
    """
    return make_builtin("cone_lift", body.dim + 1, body=body)


def cone_lift_lhat(l_body, n):
    """Closed entropic isotropic constant of the cone lift over an n-dim body."""
    return (
        (n + 2.0) ** (n / (2.0 * (n + 1.0)))
        * math.sqrt(n + 1.0)
        / (math.e * math.factorial(n) ** (1.0 / (n + 1.0)))
        * l_body ** (n / (n + 1.0))
    )


# ---------------------------------------------------------------------------
# concave section profiles
# ---------------------------------------------------------------------------


@dataclass
class ConcaveProfile:
    """A nonnegative concave scaling g on a box, given through log g.

    ``log_g`` maps points of shape (..., dim) to log g (with -inf where
    g = 0). The box must contain the support of g.
    """

    dim: int
    box: np.ndarray
    log_g: object

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float)
        if self.box.shape != (self.dim, 2):
            raise InputError("profile box must have shape (dim, 2)")
        center = self.box.mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = float(np.asarray(self.log_g(center)))
        if not np.isfinite(mid):
            raise InputError("profile must be positive at the box center")

    def power_grid(self, m, counts=2001):
        """GridFn of the potential -m log g on the profile box."""
        axes = [np.linspace(self.box[i, 0], self.box[i, 1], counts) for i in range(self.dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.asarray(self.log_g(mesh), dtype=float)
        vals = np.where(np.isfinite(lg), -float(m) * lg, np.inf)
        origin = self.box[:, 0]
        spacing = np.array([a[1] - a[0] for a in axes])
        return GridFn(origin, spacing, vals, validate=False)

    def power_moments(self, m, counts=2001):
        """logZ, barycenter, covariance of the measure g^m dy."""
        res = analyze(self.power_grid(m, counts))
        return res.logZ, res.bar, res.cov

    def max_value(self, counts=2001):
        grid = self.power_grid(1, counts)
        return math.exp(-grid.finite_min())


def tent_profile(dim=1):
    """g(y) = (1 - ||y||_1)+ on [-1, 1]^dim."""

    def log_g(y):
        s = 1.0 - np.abs(np.asarray(y, dtype=float)).sum(axis=-1)
        with np.errstate(divide="ignore"):
            return np.where(s > 0, np.log(np.maximum(s, 1e-300)), -np.inf)

    return ConcaveProfile(dim, np.stack([-np.ones(dim), np.ones(dim)], axis=1), log_g)


def profile_from_function(f, m, box):
    """g = (1 - phi/m)+ for the potential phi of a log-concave f."""

    def log_g(y):
        phi = np.asarray(f.phi(y), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(phi < m, np.log1p(-phi / m), -np.inf)

    return ConcaveProfile(f.dim, np.asarray(box, dtype=float), log_g)


# ---------------------------------------------------------------------------
# the K(C, g) identity and the limit sweep
# ---------------------------------------------------------------------------


@dataclass
class KmIdentity:
    lhs: float
    rhs: float
    lhs_log: float
    rhs_log: float
    body_constant: float
    quad_error: float


_KM_DIRECT_COUNTS = {2: 601, 3: 161}


def _km_direct(C, profile, counts):
    """Direct quadrature of the section body {(x, y) : x in g(y) C}."""
    m, n = C.dim, profile.dim
    if m + n > 3:
        raise InputError("direct section-body quadrature supports dim <= 3")
    gmax = profile.max_value()
    xbb = C.bounding_box() * gmax
    axes = [np.linspace(xbb[i, 0], xbb[i, 1], counts) for i in range(m)]
    axes += [np.linspace(profile.box[i, 0], profile.box[i, 1], counts) for i in range(n)]
    xmesh = np.stack(np.meshgrid(*axes[:m], indexing="ij"), axis=-1)
    ymesh = np.stack(np.meshgrid(*axes[m:], indexing="ij"), axis=-1)
    gx = C.gauge(xmesh)
    with np.errstate(divide="ignore", invalid="ignore"):
        gy = np.exp(np.asarray(profile.log_g(ymesh), dtype=float))
    inside = gx.reshape(gx.shape + (1,) * n) <= gy.reshape((1,) * m + gy.shape)
    vals = np.where(inside, 0.0, np.inf)
    origin = np.array([a[0] for a in axes])
    spacing = np.array([a[1] - a[0] for a in axes])
    res = analyze(GridFn(origin, spacing, vals, validate=False))
    sign, logdet = np.linalg.slogdet(res.cov)
    if sign <= 0:
        raise DegenerateError("section body covariance is not positive definite")
    return logdet - 2.0 * res.logZ


def km_isoconst(C, profile, counts=None, profile_counts=4001):
    """Check the section-body isotropy identity

        L_{K(C,g)}^{2(m+n)} = (int g^{m+2})^m / (int g^m)^{m+2}
                               * det Cov(g^m dy) * L_C^{2m}

    The left side comes from direct quadrature of the body at three
    resolutions; boundary-cell errors oscillate with node alignment, so the
    error estimate is twice the larger of the step-to-step gaps (the h/2h gap,
    and the 2h/4h gap halved). The right side comes from 1D/2D quadrature of
    the profile and the closed statistics of C.
    """
    m = C.dim
    if counts is None:
        counts = _KM_DIRECT_COUNTS.get(m + profile.dim, 161)
    lhs_log = _km_direct(C, profile, counts)
    lhs_2h = _km_direct(C, profile, counts // 2 + 1)
    lhs_4h = _km_direct(C, profile, counts // 4 + 1)
    quad_err = 2.0 * max(abs(lhs_log - lhs_2h), 0.5 * abs(lhs_2h - lhs_4h))
    res_m = analyze(profile.power_grid(m, profile_counts))
    res_m2 = analyze(profile.power_grid(m + 2, profile_counts))
    logI_m, logI_m2 = res_m.logZ, res_m2.logZ
    sign, logdet_g = np.linalg.slogdet(res_m.cov)
    if sign <= 0:
        raise DegenerateError("profile covariance is not positive definite")
    st = C.stats()
    sign_c, logdet_c = np.linalg.slogdet(st.covariance)
    rhs_log = (
        m * logI_m2
        - (m + 2.0) * logI_m
        + logdet_g
        + logdet_c
        - 2.0 * math.log(st.volume)
    )
    N = m + profile.dim
    return KmIdentity(
        math.exp(lhs_log), math.exp(rhs_log), lhs_log, rhs_log,
        math.exp(lhs_log / (2.0 * N)), quad_err,
    )


@dataclass
class KmSweep:
    ms: np.ndarray
    ratios: np.ndarray
    limit: float
    abs_errs: np.ndarray


def km_limit_sweep(f, ms, counts=8001, reference=None):
    """Sweep m -> (int g_m^{m+2})^m / (int g_m^m)^{m+2} det Cov(g_m^m dy)
    for g_m = (1 - phi/m)+, which converges to L_hat(f)^{2n}.

    ``reference`` overrides the closed/grid L_hat^{2n} used for abs_err.
    """
    from .funcspace import discretize, materialize
    from .functionals import _core, suggest_grid

    ms = np.asarray(sorted(ms), dtype=float)
    if np.any(ms <= 0):
        raise InputError("sweep exponents must be positive")
    if f.kind == "grid":
        grid = materialize(f)
    else:
        box, spacing = suggest_grid(f, counts=counts, margin=float(ms[-1]) + 5.0)
        grid = discretize(f, box, spacing, validate=False)
    phi0 = grid.phi
    ratios = np.empty(len(ms))
    for k, m in enumerate(ms):
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(phi0 < m, np.log1p(-np.minimum(phi0, m) / m), -np.inf)
        vals = np.where(np.isfinite(lg), -m * lg, np.inf)
        res = analyze(GridFn(grid.origin, grid.spacing, vals, validate=False))
        res2 = analyze(GridFn(grid.origin, grid.spacing, vals * (m + 2.0) / m, validate=False))
        sign, logdet = np.linalg.slogdet(res.cov)
        if sign <= 0:
            raise DegenerateError("sweep covariance is not positive definite")
        ratios[k] = math.exp(m * res2.logZ - (m + 2.0) * res.logZ + logdet)
    if reference is None:
        core = _core(f)
        sign, logdet = np.linalg.slogdet(core.cov)
        reference = math.exp(-2.0 * core.mean_phi - 2.0 * core.logZ + logdet)
    return KmSweep(ms, ratios, float(reference), np.abs(ratios - reference))
