"""Quadrature for e^{-phi} on extended-real grids.

The rule is a tensor trapezoid restricted to the support: along each 1D fiber
only cells whose *both* endpoints carry finite phi contribute. Indicator edges
are therefore never smoothed across the support boundary, and when the support
boundary lies on grid nodes the rule is plain second order (spectrally accurate
for smooth rapidly-decaying integrands). Log-concavity makes the finite set of
every fiber an interval, so the restriction is well defined.

Everything is computed relative to the shifted maximum of the integrand
(min phi), which keeps powers like g^m for large m in exact range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DivergentTiltError, InputError
from .funcspace import GridFn, TruncationError


def _reduce_last(vals, mask, h):
    cell = mask[..., :-1] & mask[..., 1:]
    return 0.5 * h * ((vals[..., :-1] + vals[..., 1:]) * cell).sum(axis=-1)


def integrate_masked(vals, mask, spacings):
    """Support-restricted trapezoid of ``vals`` over all axes.

    ``vals`` must already be zeroed (or finite) outside ``mask``; ``mask``
    flags the nodes where the integrand is inside the support.
    """
    v = vals
    m = mask
    for h in reversed(list(spacings)):
        v = _reduce_last(v, m, h)
        m = m.any(axis=-1)
    return float(v)


@dataclass
class GridIntegrals:
    """Moments of e^{-phi} on a grid, all in stable (log-shifted) form."""

    logZ: float
    bar: np.ndarray
    cov: np.ndarray
    mean_phi: float
    var_phi: float
    min_phi: float

    @property
    def integral(self):
        return float(np.exp(self.logZ))


def _coord(grid, i):
    ax = grid.axes()[i]
    shape = [1] * grid.dim
    shape[i] = -1
    return ax.reshape(shape)


def analyze(grid, want_moments=True):
    """Integrate a GridFn: log of the integral plus first/second moments.

    Returns a :class:`GridIntegrals` with barycenter, covariance, and the mean
    and variance of phi under the probability measure e^{-phi}/Z (which are the
    entropy and varentropy of f = e^{-phi}).
    """
    phi = grid.phi
    m0 = grid.finite_min()
    mask = np.isfinite(phi)
    with np.errstate(over="ignore"):
        F = np.where(mask, np.exp(-(phi - m0)), 0.0)
    h = grid.spacing
    Z = integrate_masked(F, mask, h)
    if Z <= 0:
        raise DegenerateError("support too thin for the grid: zero mass")
    logZ = float(np.log(Z) - m0)
    if not want_moments:
        return GridIntegrals(logZ, None, None, None, None, m0)
    n = grid.dim
    bar = np.empty(n)
    for i in range(n):
        bar[i] = integrate_masked(_coord(grid, i) * F, mask, h) / Z
    sec = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            w = _coord(grid, i) * _coord(grid, j)
            sec[i, j] = sec[j, i] = integrate_masked(w * F, mask, h) / Z
    cov = sec - np.outer(bar, bar)
    dphi = np.where(mask, phi - m0, 0.0)
    e1 = integrate_masked(dphi * F, mask, h) / Z
    e2 = integrate_masked(dphi * dphi * F, mask, h) / Z
    return GridIntegrals(logZ, bar, cov, float(e1 + m0), float(e2 - e1 * e1), m0)


def tilt_grid(grid, x):
    """Return the grid of phi + <x, z>, validating integrability of the tilt."""
    x = np.asarray(x, dtype=float)
    if x.shape != (grid.dim,):
        raise InputError(f"tilt must be a vector of length {grid.dim}")
    vals = grid.phi.copy()
    for i in range(grid.dim):
        vals = vals + x[i] * _coord(grid, i)
    try:
        return GridFn(grid.origin, grid.spacing, vals)
    except TruncationError as exc:
        raise DivergentTiltError(
            f"tilt {x.tolist()} pushes mass onto the box boundary: {exc}"
        ) from exc


def tilted_analyze(grid, x):
    """Moments of e^{-<x,z>} f(z) for a GridFn f."""
    return analyze(tilt_grid(grid, x))


# ---------------------------------------------------------------------------
# Monte Carlo (dim 4..8)
# ---------------------------------------------------------------------------


@dataclass
class McIntegrals:
    logZ: float
    bar: np.ndarray
    cov: np.ndarray
    mean_phi: float
    var_phi: float
    min_phi: float
    se_logZ: float
    samples: int
    ess: float


def mc_moments(f, samples=200_000, seed=None, center=None, cov=None, refine=1):
    """Importance-sampled moments of f = e^{-phi} from a fitted gaussian.

    Parameters
    ----------
    f : LogConcaveFn
        Must be evaluable at arbitrary points (any dim).
    samples : int
        Sample count for the final estimate.
    seed : int
        RNG seed; a fixed default is substituted by callers for reproducibility.
    center, cov : array_like, optional
        Proposal mean/covariance. When omitted a pilot round (isotropic, then
        moment-matched ``refine`` times) fits them.
    refine : int
        Pilot refit rounds when no proposal is given.

    Returns
    -------
    McIntegrals
        With the standard error of logZ and the effective sample size.
    """
    rng = np.random.default_rng(seed)
    n = f.dim
    if center is None or cov is None:
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        C = np.eye(n) if cov is None else np.asarray(cov, dtype=float)
        for _ in range(max(1, refine)):
            est = _mc_pass(f, rng, samples // 4, c, C)
            c, C = est.bar, _spd_floor(est.cov)
        center, cov = c, C
    center = np.asarray(center, dtype=float)
    cov = _spd_floor(np.asarray(cov, dtype=float))
    return _mc_pass(f, rng, samples, center, cov)


def _spd_floor(C, floor=1e-10):
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    w = np.maximum(w, floor)
    return (V * w) @ V.T


def _mc_pass(f, rng, samples, center, cov):
    n = f.dim
    L = np.linalg.cholesky(_spd_floor(cov))
    z = center + rng.standard_normal((samples, n)) @ L.T
    # gaussian log-density of the proposal
    half_logdet = float(np.sum(np.log(np.diag(L))))
    u = np.linalg.solve(L, (z - center).T)
    logq = -0.5 * (u * u).sum(axis=0) - half_logdet - 0.5 * n * np.log(2 * np.pi)
    phi = f.phi(z)
    lw = np.where(np.isfinite(phi), -phi - logq, -np.inf)
    m0 = np.max(lw)
    if not np.isfinite(m0):
        raise DegenerateError("importance sampler found no support mass")
    w = np.exp(lw - m0)
    W = w.sum()
    logZ = float(m0 + np.log(W / samples))
    wn = w / W
    bar = wn @ z
    d = z - bar
    covf = (wn[:, None] * d).T @ d
    phi0 = np.where(np.isfinite(phi), phi, 0.0)
    mean_phi = float(wn @ phi0)
    var_phi = float(wn @ (phi0 - mean_phi) ** 2)
    ess = float(1.0 / np.sum(wn**2))
    min_phi = float(phi[np.isfinite(phi)].min())
    # delta-method standard error of logZ
    se = float(np.std(w) / (np.mean(w) * np.sqrt(samples)))
    return McIntegrals(logZ, bar, covf, mean_phi, var_phi, min_phi, se, samples, ess)
