"""Discrete Legendre-Fenchel conjugation and polar duals.

The 1D kernel computes L(y) = max_i (x_i y - phi_i) through the lower convex
hull of the samples: hull segments have nondecreasing slopes, so the argmax
vertex for a query y is located by a monotone slope merge. n-D conjugation
factorizes into successive per-axis 1D transforms (conjugating the negative of
the previous stage from the second axis on). Builtins conjugate in closed form
through the transform algebra, which makes polar an exact involution on them.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError, InputError, TruncationError
from .funcspace import (
    GridFn,
    LogConcaveFn,
    TAIL_GAP,
    compose_transform,
    discretize,
    from_grid,
    make_builtin,
    materialize,
)

_NEG_INF = -np.inf


def _hull_indices(x, p):
    """Indices of the lower convex hull of (x, p), x strictly increasing."""
    stack = []
    for i in range(len(x)):
        while len(stack) >= 2:
            i0, i1 = stack[-2], stack[-1]
            if (x[i1] - x[i0]) * (p[i] - p[i0]) - (x[i] - x[i0]) * (p[i1] - p[i0]) <= 0:
                stack.pop()
            else:
                break
        stack.append(i)
    return np.asarray(stack, dtype=int)


def _hull_large(x, p):
    """Qhull-assisted hull for big inputs; falls back to the plain sweep."""
    try:
        from scipy.spatial import ConvexHull, QhullError

        hull = ConvexHull(np.column_stack([x, p]))
        idx = np.unique(hull.vertices)
    except (QhullError, ValueError):
        return _hull_indices(x, p)
    xs = x[idx]
    order = np.argsort(xs, kind="stable")
    idx = idx[order]
    sub = _hull_indices(x[idx], p[idx])
    return idx[sub]


def _conj_fiber(x, phi, y):
    """max_i (x_i y_j - phi_i) for one fiber; +inf entries of phi are ignored."""
    finite = np.isfinite(phi)
    k = int(finite.sum())
    if k == 0:
        return np.full(len(y), _NEG_INF)
    xf = x[finite]
    pf = phi[finite]
    if k == 1:
        return xf[0] * y - pf[0]
    slopes = np.diff(pf) / np.diff(xf)
    if np.all(np.diff(slopes) >= 0):
        hx, hp, hs = xf, pf, slopes
    else:
        idx = _hull_indices(xf, pf) if k <= 100_000 else _hull_large(xf, pf)
        hx, hp = xf[idx], pf[idx]
        hs = np.diff(hp) / np.diff(hx)
    pos = np.searchsorted(hs, y)
    best = np.full(len(y), _NEG_INF)
    for d in (-1, 0, 1):
        c = np.clip(pos + d, 0, len(hx) - 1)
        np.maximum(best, hx[c] * y - hp[c], out=best)
    return best


def conjugate_1d(x_nodes, phi_values, y_nodes):
    """Discrete Legendre transform of 1D samples.

    Args:
        x_nodes: strictly increasing sample locations, shape (N,).
        phi_values: potential samples, reals or +inf, shape (N,).
        y_nodes: dual evaluation points, shape (M,).

    Returns:
        Array of max_i (x_i * y - phi_i) for each y, identical to the brute
        force up to floating-point rounding, computed in O(N + M log N).

    Raises:
        InputError: unsorted nodes or fewer than two finite potential values.
    """
    x = np.asarray(x_nodes, dtype=float)
    p = np.asarray(phi_values, dtype=float)
    y = np.asarray(y_nodes, dtype=float)
    if x.ndim != 1 or x.shape != p.shape:
        raise InputError("x_nodes and phi_values must be matching 1D arrays")
    if np.any(np.diff(x) <= 0):
        raise InputError("x_nodes must be strictly increasing")
    if np.isneginf(p).any() or np.isnan(p).any():
        raise InputError("phi_values must be reals or +inf")
    if np.isfinite(p).sum() < 2:
        raise DegenerateError("need at least two finite phi values to conjugate")
    return _conj_fiber(x, p, y)


def _conj_axis(arr, nodes, dual_nodes, axis, negate):
    moved = np.moveaxis(arr, axis, -1)
    lead = moved.shape[:-1]
    flat = moved.reshape(-1, moved.shape[-1])
    out = np.empty((flat.shape[0], len(dual_nodes)))
    for r in range(flat.shape[0]):
        fiber = -flat[r] if negate else flat[r]
        out[r] = _conj_fiber(nodes, fiber, dual_nodes)
    return np.moveaxis(out.reshape(lead + (len(dual_nodes),)), -1, axis)


def _uniformize(nodes):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise InputError("dual axes need at least two nodes each")
    d = np.diff(nodes)
    if np.any(d <= 0) or np.ptp(d) > 1e-9 * np.max(d):
        raise InputError("dual axes must be uniform increasing lattices")
    return nodes


def default_dual_axes(grid):
    """Per-axis dual lattices from the subgradient-range rule.

    Radius = 1.25 * max one-sided |dphi/dx| along the axis plus an additive
    pad: past the slope range the conjugate climbs at the rate of the primal
    finite-node halfwidth, so the pad TAIL_GAP / halfwidth is what it takes
    for the dual boundary values to clear the tail criterion. Counts match
    the primal axis, made odd so 0 is a node.
    """
    axes = []
    finite = np.isfinite(grid.phi)
    capped = np.where(finite, grid.phi, 0.0)
    for i in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl_lo, sl_hi = list(sl), list(sl)
        sl_lo[i] = slice(None, -1)
        sl_hi[i] = slice(1, None)
        both = finite[tuple(sl_lo)] & finite[tuple(sl_hi)]
        diffs = np.where(
            both,
            (capped[tuple(sl_hi)] - capped[tuple(sl_lo)]) / grid.spacing[i],
            0.0,
        )
        slope = float(np.abs(diffs).max()) if diffs.size else 0.0
        any_fin = finite.any(axis=tuple(a for a in range(grid.dim) if a != i))
        idx = np.nonzero(any_fin)[0]
        halfwidth = max((idx[-1] - idx[0]) * grid.spacing[i] / 2.0, grid.spacing[i])
        radius = 1.25 * slope + 1.1 * TAIL_GAP / halfwidth
        count = grid.phi.shape[i]
        if count % 2 == 0:
            count += 1
        axes.append(np.linspace(-radius, radius, count))
    return axes


def conjugate_nd(grid, dual_axes=None):
    """Full Legendre transform of a GridFn onto a dual lattice.

    Applies the 1D kernel along each axis in turn; from the second axis on the
    input is the negated previous stage, since
    sup_x <x,y> - phi = sup_{x_2..} [<x',y'> + sup_{x_1}(x_1 y_1 - phi)].
    Equals the brute-force max over all grid nodes. Grids with dim >= 4 are
    refused upstream (GridFn enforces dim <= 3).

    The returned GridFn is built without the tail check; ``polar`` validates.
    """
    if dual_axes is None:
        dual_axes = default_dual_axes(grid)
    if len(dual_axes) != grid.dim:
        raise InputError("need one dual axis per grid dimension")
    dual_axes = [_uniformize(a) for a in dual_axes]
    if not np.isfinite(grid.phi).any():
        raise DegenerateError("cannot conjugate an everywhere-infinite grid")
    arr = grid.phi
    axes = grid.axes()
    for ax in range(grid.dim):
        arr = _conj_axis(arr, axes[ax], dual_axes[ax], ax, negate=(ax > 0))
    origin = np.array([a[0] for a in dual_axes])
    spacing = np.array([a[1] - a[0] for a in dual_axes])
    return GridFn(origin, spacing, arr, validate=False)


# ---------------------------------------------------------------------------
# piecewise-linear conjugation (exact, 1D)
# ---------------------------------------------------------------------------


def _pl_conjugate_params(params):
    xs = np.asarray(params["knots_x"], dtype=float)
    ps = np.asarray(params["knots_phi"], dtype=float)
    ls = params.get("left_slope")
    rs = params.get("right_slope")
    ys = []
    vs = []
    if ls is not None:
        ys.append(float(ls))
        vs.append(xs[0] * float(ls) - ps[0])
    for i in range(len(xs) - 1):
        m = (ps[i + 1] - ps[i]) / (xs[i + 1] - xs[i])
        if ys and m <= ys[-1]:
            continue
        ys.append(float(m))
        vs.append(xs[i] * m - ps[i])
    if rs is not None:
        if not ys or float(rs) > ys[-1]:
            ys.append(float(rs))
            vs.append(xs[-1] * float(rs) - ps[-1])
    out = {
        "knots_x": ys,
        "knots_phi": vs,
        "left_slope": None if ls is not None else float(xs[0]),
        "right_slope": None if rs is not None else float(xs[-1]),
    }
    return out


# ---------------------------------------------------------------------------
# polar duals
# ---------------------------------------------------------------------------


def _polar_base(f):
    """Closed-form polar of an untransformed builtin, or None."""
    name = f.name
    if name == "f0":
        return compose_transform(make_builtin("f0", f.dim), a=-1.0, c=float(f.dim))
    if name == "f1":
        return make_builtin("f_inf", f.dim)
    if name == "f_inf":
        return make_builtin("f1", f.dim)
    if name == "gaussian":
        return make_builtin("gaussian", f.dim, sigma2=1.0 / f.params["sigma2"])
    if name == "counterexample":
        return make_builtin(
            "custom_piecewise", 1,
            knots_x=[-1.0, 0.0, 1.0], knots_phi=[1.0, 0.0, 1.0],
            left_slope=None, right_slope=None,
        )
    if name == "custom_piecewise":
        return make_builtin("custom_piecewise", 1, **_pl_conjugate_params(f.params))
    if name == "indicator_body":
        body = f.params["body"]
        if getattr(body, "kind", None) == "cube":
            return make_builtin("f1", f.dim)
        return None
    return None


def closed_polar_available(f):
    if f.kind != "builtin":
        return False
    probe = LogConcaveFn(kind="builtin", name=f.name, dim=f.dim, params=f.params)
    return _polar_base(probe) is not None


def polar(f, box=None, spacing=None, dual_axes=None):
    """Polar dual f°(y) = inf_x e^{-<x,y>} / f(x) = e^{-L phi (y)}.

    Builtins with a closed-form dual return an exact builtin descriptor, for
    any transform metadata: the conjugate of
    phi = t*phi_b(a(z - x0)) + <z, y0> + c is
    t*(L phi_b)((w - y0)/(t a)) + <w, x0> - <x0, y0> - c.

    Everything else goes through the grid transform: a grid descriptor is
    materialized directly; a builtin without closed form needs ``box`` and
    ``spacing`` for discretization. The dual grid must satisfy the tail
    criterion or a TruncationError explains that the dual box is too small.
    """
    if f.kind == "builtin":
        fresh = LogConcaveFn(kind="builtin", name=f.name, dim=f.dim, params=f.params)
        base_polar = _polar_base(fresh)
        if base_polar is not None:
            t, a = f.power, f.scale
            return compose_transform(
                base_polar,
                t=t,
                a=1.0 / (t * a),
                x0=f.tilt,
                y0=f.shift,
                c=-float(f.shift @ f.tilt) - f.offset,
            )
        if box is None or spacing is None:
            raise InputError(
                f"no closed-form polar for builtin {f.name!r}; "
                "pass box and spacing for a grid polar"
            )
        grid = discretize(f, box, spacing)
    else:
        grid = materialize(f)
    dual = conjugate_nd(grid, dual_axes)
    try:
        checked = GridFn(dual.origin, dual.spacing, dual.phi)
    except TruncationError as exc:
        raise TruncationError(
            f"dual grid too small to capture the dual effective domain: {exc}"
        ) from exc
    return from_grid(checked)


def involution_defect(f, box=None, spacing=None, dual_axes=None):
    """sup |phi** - phi| over the interior 80% of the primal box.

    The biconjugate is computed by conjugating twice, the second time straight
    back onto the primal lattice (so aligned lattices report only rounding).
    Nodes with phi = +inf are excluded: the biconjugate is a finite minorant
    there by construction.
    """
    if f.kind == "grid":
        grid = materialize(f)
    elif box is not None and spacing is not None:
        grid = discretize(f, box, spacing)
    else:
        raise InputError("involution_defect on a builtin needs box and spacing")
    dual = conjugate_nd(grid, dual_axes)
    back = conjugate_nd(dual, grid.axes())
    lo = grid.origin
    hi = grid.origin + grid.spacing * (np.array(grid.counts) - 1)
    cut_lo = lo + 0.1 * (hi - lo)
    cut_hi = hi - 0.1 * (hi - lo)
    sel = np.ones(grid.counts, dtype=bool)
    for i, ax in enumerate(grid.axes()):
        inside = (ax >= cut_lo[i] - 1e-12) & (ax <= cut_hi[i] + 1e-12)
        shape = [1] * grid.dim
        shape[i] = -1
        sel &= inside.reshape(shape)
    sel &= np.isfinite(grid.phi)
    if not sel.any():
        raise DegenerateError("no finite interior nodes to compare")
    return float(np.max(np.abs(back.phi[sel] - grid.phi[sel])))
