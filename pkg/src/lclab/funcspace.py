"""Log-concave functions f = e^{-phi} with extended-real convex potentials.

A function is either a *builtin* (closed-form potential, possibly composed with
the transform metadata below) or a *grid* (potential sampled on an axis-aligned
tensor lattice, +inf encoding f = 0).

Transform metadata on a descriptor represents

    f(z) = base(scale * (z - shift)) ** power * exp(-<z, tilt> - offset)

equivalently phi(z) = power * phi_base(scale*(z - shift)) + <z, tilt> + offset.
``tilt_translate`` and ``power`` update these fields; ``scale`` and ``offset``
are only ever introduced by polar closed forms, which keeps the builtin family
closed under conjugation.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, InitVar

import numpy as np

from .errors import InputError, TruncationError, DegenerateError

INF = np.inf

#: relative mass below which a tail is considered negligible
EPS_TAIL = 1e-12

#: a boundary potential must exceed the interior minimum by this gap
TAIL_GAP = float(np.log(1.0 / EPS_TAIL))

BUILTIN_NAMES = (
    "f0",
    "f1",
    "f_inf",
    "gaussian",
    "counterexample",
    "cone_lift",
    "indicator_body",
    "custom_piecewise",
)


def _as_points(x, dim):
    """Coerce x to shape (..., dim); 1D functions also accept bare (m,) input."""
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.ndim == 0 or x.shape[-1] != dim:
        raise InputError(f"expected points with last axis {dim}, got shape {x.shape}")
    return x


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class GridFn:
    """Potential phi sampled on a uniform tensor grid (dim <= 3).

    Node j along axis i sits at ``origin[i] + j * spacing[i]``; ``phi`` is
    row-major with shape = counts. Values are finite reals or +inf (f = 0).

    The class invariant is the tail criterion: on every boundary face phi is
    +inf or exceeds the global minimum by at least ``TAIL_GAP``, so that the
    box captures all but a ~1e-12 fraction of the mass. Construction raises
    ``TruncationError`` otherwise (pass ``validate=False`` only for transient
    intermediates).
    """

    origin: np.ndarray
    spacing: np.ndarray
    phi: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        self.phi = np.asarray(self.phi, dtype=float)
        n = self.phi.ndim
        self.origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        self.spacing = np.atleast_1d(np.asarray(self.spacing, dtype=float))
        if not 1 <= n <= 3:
            raise InputError(f"grids support 1 <= dim <= 3, got {n}")
        if self.origin.shape != (n,) or self.spacing.shape != (n,):
            raise InputError("origin/spacing must have one entry per grid axis")
        if not np.all(np.isfinite(self.origin)):
            raise InputError("grid origin must be finite")
        if not np.all((self.spacing > 0) & np.isfinite(self.spacing)):
            raise InputError("grid spacing must be positive and finite")
        if any(c < 2 for c in self.phi.shape):
            raise InputError("each grid axis needs at least 2 nodes")
        if np.isnan(self.phi).any() or np.isneginf(self.phi).any():
            raise InputError("phi values must be reals or +inf")
        if validate:
            self.check_tail()

    def __eq__(self, other):
        if not isinstance(other, GridFn):
            return NotImplemented
        return (
            np.array_equal(self.origin, other.origin)
            and np.array_equal(self.spacing, other.spacing)
            and np.array_equal(self.phi, other.phi)
        )

    @property
    def dim(self):
        return self.phi.ndim

    @property
    def counts(self):
        return self.phi.shape

    def axes(self):
        return [
            self.origin[i] + self.spacing[i] * np.arange(self.phi.shape[i])
            for i in range(self.dim)
        ]

    def box(self):
        hi = self.origin + self.spacing * (np.array(self.phi.shape) - 1)
        return np.stack([self.origin, hi], axis=1)

    def finite_min(self):
        m = np.min(self.phi)
        if not np.isfinite(m):
            raise DegenerateError("grid potential is +inf everywhere")
        return float(m)

    def check_tail(self):
        """Raise TruncationError unless every boundary node is negligible."""
        m = self.finite_min()
        bad = []
        for ax in range(self.dim):
            for side, idx in ((0, 0), (1, -1)):
                face = np.take(self.phi, idx, axis=ax)
                viol = face[~(np.isposinf(face) | (face >= m + TAIL_GAP))]
                if viol.size:
                    bad.append((ax, side, float(viol.min()) - m))
        if bad:
            ax, side, gap = bad[0]
            raise TruncationError(
                f"boundary mass not negligible: face axis={ax} side={side} has "
                f"phi-min exceeding interior minimum by only {gap:.3g} "
                f"(need >= {TAIL_GAP:.3f}); enlarge the box"
            )

    def interp_phi(self, x):
        """Multilinear interpolation of phi at points x (+inf outside the box).

        Cells touching the +inf region fall back to the nearest node's value,
        which keeps the support from being smoothed outward.
        """
        x = _as_points(x, self.dim)
        t = (x - self.origin) / self.spacing
        counts = np.array(self.phi.shape)
        inside = np.all((t >= -1e-9) & (t <= counts - 1 + 1e-9), axis=-1)
        tc = np.clip(t, 0.0, counts - 1)
        lo = np.minimum(np.floor(tc).astype(int), counts - 2)
        frac = tc - lo
        corner_vals = []
        for corner in range(1 << self.dim):
            offs = [(corner >> i) & 1 for i in range(self.dim)]
            idx = tuple(lo[..., i] + offs[i] for i in range(self.dim))
            corner_vals.append(self.phi[idx])
        vals = np.stack(corner_vals, axis=-1)
        weights = np.ones(vals.shape)
        for i in range(self.dim):
            bit = np.array([(c >> i) & 1 for c in range(1 << self.dim)], dtype=float)
            weights = weights * (bit * frac[..., i : i + 1] + (1 - bit) * (1 - frac[..., i : i + 1]))
        all_finite = np.all(np.isfinite(vals), axis=-1)
        lin = np.einsum("...c,...c->...", np.where(np.isfinite(vals), vals, 0.0), weights)
        nearest = np.take_along_axis(vals, np.argmax(weights, axis=-1)[..., None], axis=-1)[..., 0]
        out = np.where(all_finite, lin, nearest)
        return np.where(inside, out, INF)


# ---------------------------------------------------------------------------
# piecewise-linear potentials (1D)
# ---------------------------------------------------------------------------


def _validate_piecewise(params):
    xs = np.asarray(params.get("knots_x", ()), dtype=float)
    ps = np.asarray(params.get("knots_phi", ()), dtype=float)
    ls = params.get("left_slope")
    rs = params.get("right_slope")
    if xs.ndim != 1 or xs.shape != ps.shape or xs.size < 1:
        raise InputError("custom_piecewise needs matching 1D knots_x/knots_phi")
    if xs.size == 1 and ls is None and rs is None:
        raise InputError("a single knot with no tails is a degenerate (point) support")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ps))):
        raise InputError("piecewise knots must be finite")
    if np.any(np.diff(xs) <= 0):
        raise InputError("knots_x must be strictly increasing")
    slopes = np.diff(ps) / np.diff(xs) if xs.size > 1 else np.empty(0)
    chain = []
    if ls is not None:
        chain.append(float(ls))
    chain.extend(slopes.tolist())
    if rs is not None:
        chain.append(float(rs))
    if np.any(np.diff(chain) < -1e-12):
        raise InputError("piecewise potential is not convex (slopes must be nondecreasing)")
    return xs, ps, (None if ls is None else float(ls)), (None if rs is None else float(rs))


def _phi_piecewise(u, params):
    xs = np.asarray(params["knots_x"], dtype=float)
    ps = np.asarray(params["knots_phi"], dtype=float)
    ls = params.get("left_slope")
    rs = params.get("right_slope")
    out = np.interp(u, xs, ps)
    left = u < xs[0]
    right = u > xs[-1]
    out = np.where(left, INF if ls is None else ps[0] + ls * (u - xs[0]), out)
    out = np.where(right, INF if rs is None else ps[-1] + rs * (u - xs[-1]), out)
    return out


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class LogConcaveFn:
    """A log-concave function: builtin closed form or sampled grid.

    See the module docstring for how (shift, tilt, power, scale, offset)
    compose with the base potential.
    """

    kind: str
    dim: int
    name: str | None = None
    params: dict = field(default_factory=dict)
    grid: GridFn | None = None
    shift: np.ndarray = None
    tilt: np.ndarray = None
    power: float = 1.0
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("builtin", "grid"):
            raise InputError(f"kind must be 'builtin' or 'grid', got {self.kind!r}")
        if self.dim < 1:
            raise InputError("dim must be >= 1")
        if self.kind == "builtin":
            if self.name not in BUILTIN_NAMES:
                raise InputError(f"unknown builtin {self.name!r}; choose from {BUILTIN_NAMES}")
            self._check_builtin()
        else:
            if self.grid is None:
                raise InputError("grid kind requires a GridFn")
            if self.grid.dim != self.dim:
                raise InputError("grid dimension does not match descriptor dim")
        z = np.zeros(self.dim)
        self.shift = z if self.shift is None else np.asarray(self.shift, dtype=float)
        self.tilt = z.copy() if self.tilt is None else np.asarray(self.tilt, dtype=float)
        if self.shift.shape != (self.dim,) or self.tilt.shape != (self.dim,):
            raise InputError("shift/tilt must be vectors of length dim")
        self.power = float(self.power)
        self.scale = float(self.scale)
        self.offset = float(self.offset)
        if not (self.power > 0 and np.isfinite(self.power)):
            raise InputError("power must be a positive real")
        if self.scale == 0 or not np.isfinite(self.scale):
            raise InputError("scale must be a nonzero real")

    def _check_builtin(self):
        name, dim, p = self.name, self.dim, self.params
        if name == "gaussian":
            s2 = p.setdefault("sigma2", 1.0)
            if not (s2 > 0 and np.isfinite(s2)):
                raise InputError("gaussian requires sigma2 > 0")
        elif name == "counterexample":
            if dim != 1:
                raise InputError("counterexample is one-dimensional")
        elif name == "custom_piecewise":
            if dim != 1:
                raise InputError("custom_piecewise is one-dimensional")
            _validate_piecewise(p)
        elif name == "indicator_body":
            body = p.get("body")
            if body is None or not hasattr(body, "gauge"):
                raise InputError("indicator_body requires params['body'] with a gauge")
            if body.dim != dim:
                raise InputError("indicator_body dim must equal the body dim")
        elif name == "cone_lift":
            body = p.get("body")
            if body is None or not hasattr(body, "gauge"):
                raise InputError("cone_lift requires params['body'] with a gauge")
            if body.dim + 1 != dim:
                raise InputError("cone_lift dim must be body dim + 1")
        elif p:
            raise InputError(f"builtin {name!r} takes no params")

    # -- evaluation ---------------------------------------------------------

    def _phi_base(self, u):
        name = self.name
        if self.kind == "grid":
            return self.grid.interp_phi(u)
        if name == "f0":
            s = u.sum(axis=-1)
            inside = np.all(u >= -1.0, axis=-1)
            return np.where(inside, s, INF)
        if name == "f1":
            return np.abs(u).sum(axis=-1)
        if name == "f_inf":
            inside = np.all(np.abs(u) <= 1.0, axis=-1)
            return np.where(inside, 0.0, INF)
        if name == "gaussian":
            return (u * u).sum(axis=-1) / (2.0 * self.params["sigma2"])
        if name == "counterexample":
            return np.maximum(np.abs(u[..., 0]) - 1.0, 0.0)
        if name == "custom_piecewise":
            return _phi_piecewise(u[..., 0], self.params)
        if name == "indicator_body":
            g = self.params["body"].gauge(u)
            return np.where(g <= 1.0, 0.0, INF)
        if name == "cone_lift":
            body = self.params["body"]
            n = body.dim
            g = body.gauge(u[..., :n])
            s = u[..., n]
            # tolerant support test: grid nodes meant to sit exactly on the
            # slant accumulate ~1e-16 coordinate roundoff, and the dropped
            # boundary node is where the density peaks
            cap = s + n + 1.0
            return np.where(g <= cap + 1e-9 * (1.0 + np.abs(cap)), s, INF)
        raise InputError(f"unhandled builtin {name!r}")

    def phi(self, x):
        """Evaluate the potential phi at points x, vectorized over leading axes."""
        x = _as_points(x, self.dim)
        u = self.scale * (x - self.shift)
        base = self._phi_base(u)
        out = self.power * base + x @ self.tilt + self.offset
        # inf * 1.0 stays inf; make sure 0-tilt does not produce nan via inf+(-inf)
        return out

    def value(self, x):
        """Evaluate f = e^{-phi} at points x."""
        with np.errstate(over="ignore"):
            return np.exp(-self.phi(x))

    def is_transformed(self):
        return (
            self.power != 1.0
            or self.scale != 1.0
            or self.offset != 0.0
            or np.any(self.shift != 0)
            or np.any(self.tilt != 0)
        )

    def __eq__(self, other):
        if not isinstance(other, LogConcaveFn):
            return NotImplemented
        if (self.kind, self.dim, self.name) != (other.kind, other.dim, other.name):
            return False
        if (self.power, self.scale, self.offset) != (other.power, other.scale, other.offset):
            return False
        if not (np.array_equal(self.shift, other.shift) and np.array_equal(self.tilt, other.tilt)):
            return False
        if self.grid is not None or other.grid is not None:
            if self.grid != other.grid:
                return False
        sp = _params_to_jsonable(self.params)
        op = _params_to_jsonable(other.params)
        return json.dumps(sp, sort_keys=True) == json.dumps(op, sort_keys=True)

    # -- serialization ------------------------------------------------------

    def to_dict(self, grid_path=None):
        d = {
            "kind": self.kind,
            "name": self.name,
            "dim": self.dim,
            "params": _params_to_jsonable(self.params),
            "tilt": self.tilt.tolist(),
            "shift": self.shift.tolist(),
            "power": self.power,
        }
        if self.kind == "grid":
            if grid_path is None:
                raise InputError("serializing a grid function requires grid_path")
            d["path"] = grid_path
            del d["name"]
        if self.scale != 1.0:
            d["scale"] = self.scale
        if self.offset != 0.0:
            d["offset"] = self.offset
        return d


def _params_to_jsonable(params):
    out = {}
    for k, v in params.items():
        if k == "body":
            out[k] = v.to_dict()
        elif isinstance(v, np.ndarray):
            out[k] = v.tolist()
        else:
            out[k] = v
    return out


def _params_from_jsonable(params):
    params = dict(params or {})
    if "body" in params and isinstance(params["body"], dict):
        from .bodies import body_from_dict  # deferred to avoid an import cycle

        params["body"] = body_from_dict(params["body"])
    return params


def function_from_dict(d, base_dir="."):
    """Rebuild a LogConcaveFn from its descriptor dictionary."""
    if not isinstance(d, dict) or "kind" not in d:
        raise InputError("function descriptor must be a dict with a 'kind'")
    kw = dict(
        shift=d.get("shift"),
        tilt=d.get("tilt"),
        power=d.get("power", 1.0),
        scale=d.get("scale", 1.0),
        offset=d.get("offset", 0.0),
    )
    if d["kind"] == "builtin":
        return LogConcaveFn(
            kind="builtin",
            name=d.get("name"),
            dim=int(d.get("dim", 0)),
            params=_params_from_jsonable(d.get("params")),
            **kw,
        )
    if d["kind"] == "grid":
        path = d.get("path")
        if path is None:
            raise InputError("grid descriptor requires a 'path' to an LCGRID file")
        grid = load_grid(os.path.join(base_dir, path))
        return LogConcaveFn(kind="grid", dim=grid.dim, grid=grid, **kw)
    raise InputError(f"unknown descriptor kind {d['kind']!r}")


def save_function(f, path, grid_path=None):
    if f.kind == "grid":
        if grid_path is None:
            grid_path = os.path.splitext(path)[0] + ".lcgrid"
        save_grid(f.grid, grid_path)
        rel = os.path.relpath(grid_path, os.path.dirname(path) or ".")
        d = f.to_dict(grid_path=rel)
    else:
        d = f.to_dict()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=2)
        fh.write("\n")


def load_function(path):
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    return function_from_dict(d, base_dir=os.path.dirname(path) or ".")


# ---------------------------------------------------------------------------
# constructors and transforms
# ---------------------------------------------------------------------------


def make_builtin(name, dim, params=None, **kw):
    """Construct a builtin log-concave function.

    Parameters
    ----------
    name : str
        One of ``BUILTIN_NAMES``. ``f0`` is e^{-sum z} on [-1, inf)^n, ``f1``
        is e^{-sum |z|}, ``f_inf`` the cube indicator, ``gaussian`` takes
        ``sigma2``, ``counterexample`` is the 1D heavy-tailed cube extension,
        ``custom_piecewise`` a 1D piecewise-linear potential, and
        ``indicator_body`` / ``cone_lift`` wrap a body from :mod:`lclab.bodies`.
    dim : int
        Ambient dimension of the function (body dim + 1 for ``cone_lift``).
    params : dict, optional
        Builtin-specific parameters; keyword arguments are merged in.
    """
    p = dict(params or {})
    p.update(kw)
    return LogConcaveFn(kind="builtin", name=name, dim=dim, params=p)


def from_grid(grid):
    """Wrap a GridFn as a LogConcaveFn descriptor."""
    return LogConcaveFn(kind="grid", dim=grid.dim, grid=grid)


def tilt_translate(f, x0, y0):
    """Return the perturbation f(z - x0) * e^{-<z, y0>} of f.

    The stored shift and tilt fields are updated componentwise; applied to an
    untransformed f this is exactly the two-parameter perturbation family used
    by the minimizer certificates, and the update is an exact involution:
    ``tilt_translate(tilt_translate(f, a, b), -a, -b)`` equals ``f``.
    """
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (f.dim,))
    y0 = np.broadcast_to(np.asarray(y0, dtype=float), (f.dim,))
    return _replace(f, shift=f.shift + x0, tilt=f.tilt + y0)


def power(f, t):
    """Pointwise power f^t for t > 0 (tilt and offset scale with t)."""
    t = float(t)
    if not (t > 0 and np.isfinite(t)):
        raise InputError("power requires t > 0")
    return _replace(f, power=t * f.power, tilt=t * f.tilt, offset=t * f.offset)


def _replace(f, **kw):
    base = dict(
        kind=f.kind, dim=f.dim, name=f.name, params=f.params, grid=f.grid,
        shift=f.shift, tilt=f.tilt, power=f.power, scale=f.scale, offset=f.offset,
    )
    base.update(kw)
    return LogConcaveFn(**base)


def compose_transform(f, t=1.0, a=1.0, x0=None, y0=None, c=0.0):
    """Exact composition g(z) = f(a*(z - x0))^t * e^{-<z,y0> - c}.

    Unlike ``tilt_translate`` this is strict function composition: the
    cross-terms between the outer shift and the inner tilt are folded into the
    offset so that ``g`` evaluates exactly as written. Used by the polar
    closed forms.
    """
    x0 = np.zeros(f.dim) if x0 is None else np.asarray(x0, dtype=float)
    y0 = np.zeros(f.dim) if y0 is None else np.asarray(y0, dtype=float)
    t = float(t)
    a = float(a)
    if not (t > 0 and np.isfinite(t)):
        raise InputError("compose_transform requires t > 0")
    if a == 0 or not np.isfinite(a):
        raise InputError("compose_transform requires a != 0")
    # inner: f(u) = base(scale*(u - shift))^power e^{-<u,tilt> - offset}
    new_power = t * f.power
    new_scale = a * f.scale
    new_shift = x0 + f.shift / a
    new_tilt = t * a * f.tilt + y0
    new_offset = c + t * f.offset - t * a * float(x0 @ f.tilt)
    return _replace(
        f, power=new_power, scale=new_scale, shift=new_shift,
        tilt=new_tilt, offset=new_offset,
    )


def materialize(f):
    """Fold a grid descriptor's transform metadata into a plain GridFn, exactly.

    A scalar argument scaling maps the lattice to a lattice (reversed when the
    scale is negative), so the transformed potential is known exactly at the
    new nodes; no interpolation happens. Raises TruncationError if the
    transformed grid fails the tail criterion (e.g. after a strong tilt).
    """
    if f.kind != "grid":
        raise InputError("materialize applies to grid descriptors")
    raw = f.grid
    s = f.scale
    phi = raw.phi
    if s < 0:
        phi = phi[(slice(None, None, -1),) * raw.dim]
    # node u_j along axis i maps to z = shift + u_j / s
    lo_raw = raw.origin
    hi_raw = raw.origin + raw.spacing * (np.array(raw.counts) - 1)
    origin = f.shift + (hi_raw if s < 0 else lo_raw) / s
    spacing = raw.spacing / abs(s)
    vals = f.power * phi
    if np.any(f.tilt != 0) or f.offset != 0:
        vals = vals + f.offset
        for i in range(raw.dim):
            z_i = origin[i] + spacing[i] * np.arange(vals.shape[i])
            shape = [1] * raw.dim
            shape[i] = -1
            vals = vals + f.tilt[i] * z_i.reshape(shape)
    return GridFn(origin, spacing, vals)


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------


def _normalize_box(box, dim):
    box = np.asarray(box, dtype=float)
    if box.shape == (2,) and dim == 1:
        box = box[None, :]
    if box.shape != (dim, 2):
        raise InputError(f"box must have shape ({dim}, 2)")
    if np.any(box[:, 1] <= box[:, 0]):
        raise InputError("box upper bounds must exceed lower bounds")
    return box


def discretize(f, box, spacing, validate=True):
    """Sample f's potential on a uniform grid over ``box``.

    Parameters
    ----------
    f : LogConcaveFn
    box : array_like, shape (dim, 2)
        Axis-aligned bounds. Each extent must be an integer number of cells;
        align box edges with support boundaries (they become exact grid nodes,
        which is what keeps the trapezoid quadrature second order).
    spacing : float or array_like
        Cell size per axis.
    validate : bool
        Check the boundary tail criterion of the resulting grid.

    Returns
    -------
    GridFn

    Raises
    ------
    TruncationError
        If the box boundary carries non-negligible mass.
    """
    if f.dim > 3:
        raise InputError("grids are limited to dim <= 3; use Monte Carlo beyond")
    box = _normalize_box(box, f.dim)
    h = np.broadcast_to(np.asarray(spacing, dtype=float), (f.dim,)).copy()
    if np.any(h <= 0):
        raise InputError("spacing must be positive")
    steps = (box[:, 1] - box[:, 0]) / h
    counts = np.rint(steps).astype(int) + 1
    if np.any(np.abs(steps - np.rint(steps)) > 1e-6 * np.maximum(1, steps)):
        raise InputError("box extents must be integer multiples of the spacing")
    axes = [box[i, 0] + h[i] * np.arange(counts[i]) for i in range(f.dim)]
    phi = _eval_on_axes(f, axes)
    return GridFn(box[:, 0], h, phi, validate=validate)


def _eval_on_axes(f, axes, chunk_bytes=int(2e8)):
    """Evaluate f.phi on the tensor grid of ``axes``, chunking along axis 0."""
    counts = [len(a) for a in axes]
    n = len(axes)
    total = int(np.prod(counts)) * n * 8
    if total <= chunk_bytes or n == 1:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return f.phi(mesh)
    rows_per = max(1, chunk_bytes // (int(np.prod(counts[1:])) * n * 8))
    out = np.empty(counts, dtype=float)
    for start in range(0, counts[0], rows_per):
        sl = axes[0][start : start + rows_per]
        mesh = np.stack(np.meshgrid(sl, *axes[1:], indexing="ij"), axis=-1)
        out[start : start + len(sl)] = f.phi(mesh)
    return out


# ---------------------------------------------------------------------------
# LCGRID file format
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(
    r"^LCGRID v1 dim=(\d+) counts=([\d,]+) origin=([^ ]+) spacing=([^ \n]+)\s*$"
)


def save_grid(grid, path):
    """Write a GridFn in the LCGRID v1 text format (token ``inf`` for +inf)."""
    counts = ",".join(str(c) for c in grid.counts)
    origin = ",".join(repr(float(v)) for v in grid.origin)
    spacing = ",".join(repr(float(v)) for v in grid.spacing)
    flat = grid.phi.ravel(order="C")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"LCGRID v1 dim={grid.dim} counts={counts} origin={origin} spacing={spacing}\n")
        for start in range(0, flat.size, 8):
            chunk = flat[start : start + 8]
            fh.write(" ".join("inf" if np.isposinf(v) else repr(float(v)) for v in chunk))
            fh.write("\n")


def load_grid(path):
    """Read an LCGRID v1 file back into a GridFn."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        m = _HEADER_RE.match(header)
        if not m:
            raise InputError(f"not an LCGRID v1 file: {path}")
        dim = int(m.group(1))
        counts = [int(c) for c in m.group(2).split(",")]
        origin = [float(c) for c in m.group(3).split(",")]
        spacing = [float(c) for c in m.group(4).split(",")]
        if len(counts) != dim or len(origin) != dim or len(spacing) != dim:
            raise InputError("LCGRID header fields disagree about dim")
        body = fh.read().split()
    expect = int(np.prod(counts))
    if len(body) != expect:
        raise InputError(f"LCGRID data has {len(body)} values, header promises {expect}")
    vals = np.array([float(tok) for tok in body], dtype=float).reshape(counts)
    return GridFn(np.array(origin), np.array(spacing), vals)
