"""Certificates for candidate minimizers of the Mahler volume.

A local minimizer f of M(f) = int f * int f° must satisfy first-order
conditions (barycenters of f and f° vanish, h(f) + h(f°) = n) and
second-order ones (Cov(f°) >= Cov(f)^{-1} in the positive-semidefinite
order, V(f) + V(f°) >= n). This module computes those residuals and
margins, the derivatives of the power family log p(t) with
p(t) = t^n int f^t int (f°)^t = M(f^t), the slicing product
L_hat(f) * L_hat(f°) * M(f)^{1/n}, and the scan of the entropy sum
S(t) = h(f^t) + h((f^t)°) for the heavy-tailed cube extension, whose
excursion above n answers the "is h(f) + h(f°) <= n always" question in
the negative.

Everything here works on descriptor pairs (f, f°): closed moment formulas
are used when the descriptor admits them, grid quadrature otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InputError
from .funcspace import TAIL_GAP, discretize, make_builtin, power
from .functionals import _core
from .legendre import polar
from .quadrature import analyze

CERT_FIELDS = (
    "bar_f_norm",
    "bar_fpolar_norm",
    "entropy_residual",
    "schur_lambda_min",
    "varentropy_margin",
    "slicing_product",
    "logp_prime_at_1",
    "logp_second_at_1",
)


@dataclass
class Certificate:
    """Residuals and margins of the minimizer conditions.

    ``entropy_residual`` is the signed h(f) + h(f°) - n; fields not yet
    computed are None (``criticality_residuals`` fills the first three,
    ``second_order_certificate`` five, ``full_certificate`` all eight).
    """

    bar_f_norm: float = None
    bar_fpolar_norm: float = None
    entropy_residual: float = None
    schur_lambda_min: float = None
    varentropy_margin: float = None
    slicing_product: float = None
    logp_prime_at_1: float = None
    logp_second_at_1: float = None

    def to_dict(self):
        return {name: getattr(self, name) for name in CERT_FIELDS}


def _pair_cores(f, fpolar=None, method="auto", box=None, spacing=None,
                polar_box=None, polar_spacing=None, dual_axes=None):
    if fpolar is None:
        fpolar = polar(f, box=box, spacing=spacing, dual_axes=dual_axes)
    cf = _core(f, method, box, spacing)
    cg = _core(fpolar, method, polar_box, polar_spacing)
    return cf, cg, fpolar


def _check_spd(cov, label):
    w = np.linalg.eigvalsh((cov + cov.T) / 2.0)
    if w[0] <= 0:
        raise DegenerateError(f"{label} covariance is not positive definite")


def hessian_block(f, **kw):
    """Block Hessian of log M over shift/tilt perturbations, and its Jacobian.

    Returns (H, jac) with H = [[Cov(f°), -I], [-I, Cov(f)]] (the positive
    scalar M(f) is dropped since it cannot change definiteness) and
    jac = -M(f) * (bar(f°), bar(f)). H is positive semidefinite exactly when
    Cov(f°) >= Cov(f)^{-1}.
    """
    cf, cg, _ = _pair_cores(f, **kw)
    _check_spd(cf.cov, "primal")
    _check_spd(cg.cov, "polar")
    eye = np.eye(f.dim)
    H = np.block([[cg.cov, -eye], [-eye, cf.cov]])
    m_val = math.exp(cf.logZ + cg.logZ)
    jac = -m_val * np.concatenate([cg.bar, cf.bar])
    return H, jac


def criticality_residuals(f, **kw):
    """First-order residuals ||bar(f)||, ||bar(f°)||, h(f) + h(f°) - n."""
    cf, cg, _ = _pair_cores(f, **kw)
    return Certificate(
        bar_f_norm=float(np.linalg.norm(cf.bar)),
        bar_fpolar_norm=float(np.linalg.norm(cg.bar)),
        entropy_residual=float(cf.mean_phi + cg.mean_phi - f.dim),
    )


def second_order_certificate(f, **kw):
    """Criticality residuals plus the two second-order margins.

    schur_lambda_min is the smallest eigenvalue of Cov(f°) - Cov(f)^{-1};
    varentropy_margin is V(f) + V(f°) - n. Both must be >= -tol at a local
    minimizer.
    """
    cf, cg, _ = _pair_cores(f, **kw)
    _check_spd(cf.cov, "primal")
    _check_spd(cg.cov, "polar")
    diff = cg.cov - np.linalg.inv(cf.cov)
    return Certificate(
        bar_f_norm=float(np.linalg.norm(cf.bar)),
        bar_fpolar_norm=float(np.linalg.norm(cg.bar)),
        entropy_residual=float(cf.mean_phi + cg.mean_phi - f.dim),
        schur_lambda_min=float(np.linalg.eigvalsh((diff + diff.T) / 2.0)[0]),
        varentropy_margin=float(cf.var_phi + cg.var_phi - f.dim),
    )


def _lhat(core, n):
    sign, logdet = np.linalg.slogdet(core.cov)
    if sign <= 0:
        raise DegenerateError("covariance is not positive definite")
    return math.exp((-core.mean_phi - core.logZ) / n + logdet / (2.0 * n))


def slicing_bound_check(f, **kw):
    """The product L_hat(f) * L_hat(f°) * M(f)^{1/n}.

    Equals 1/e for f0 and for gaussians; the strong entropic slicing bound
    would force it >= 1/e at every local minimizer of M. Reported, never
    asserted.
    """
    cf, cg, _ = _pair_cores(f, **kw)
    n = f.dim
    return _lhat(cf, n) * _lhat(cg, n) * math.exp((cf.logZ + cg.logZ) / n)


def logp_derivatives(f, t=1.0, fpolar=None, method="auto", box=None,
                     spacing=None, polar_box=None, polar_spacing=None,
                     dual_axes=None):
    """(d/dt) log p and (d/dt)^2 log p at t, for p(t) = t^n int f^t int (f°)^t.

    Differentiating under the integral, the first derivative is n/t minus
    the means of the potentials under the f^t- and (f°)^t-measures over t,
    and the second is their variances over t^2 minus n/t^2. Note p(t) is
    exactly M(f^t), so finite differences of log mahler(power(f, t)) are an
    independent check.
    """
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise InputError("logp_derivatives requires t > 0")
    if fpolar is None:
        fpolar = polar(f, box=box, spacing=spacing, dual_axes=dual_axes)
    cf = _core(power(f, t), method, box, spacing)
    cg = _core(power(fpolar, t), method, polar_box, polar_spacing)
    n = f.dim
    d1 = float((n - cf.mean_phi - cg.mean_phi) / t)
    d2 = float((cf.var_phi + cg.var_phi - n) / (t * t))
    return d1, d2


def full_certificate(f, **kw):
    """All eight certificate fields.

    The logp entries come from an independent pass through the power-family
    descriptors at t = 1, so comparing them with entropy_residual and
    varentropy_margin cross-checks two code paths against each other.
    """
    cf, cg, fpolar = _pair_cores(f, **kw)
    _check_spd(cf.cov, "primal")
    _check_spd(cg.cov, "polar")
    n = f.dim
    diff = cg.cov - np.linalg.inv(cf.cov)
    d1, d2 = logp_derivatives(f, 1.0, fpolar=fpolar,
                              method=kw.get("method", "auto"),
                              box=kw.get("box"), spacing=kw.get("spacing"),
                              polar_box=kw.get("polar_box"),
                              polar_spacing=kw.get("polar_spacing"))
    return Certificate(
        bar_f_norm=float(np.linalg.norm(cf.bar)),
        bar_fpolar_norm=float(np.linalg.norm(cg.bar)),
        entropy_residual=float(cf.mean_phi + cg.mean_phi - n),
        schur_lambda_min=float(np.linalg.eigvalsh((diff + diff.T) / 2.0)[0]),
        varentropy_margin=float(cf.var_phi + cg.var_phi - n),
        slicing_product=_lhat(cf, n) * _lhat(cg, n)
        * math.exp((cf.logZ + cg.logZ) / n),
        logp_prime_at_1=d1,
        logp_second_at_1=d2,
    )


def jensen_sandwich_check(f, tol=1e-8, **kw):
    """Gaps of max f * e^{-n} <= e^{-h(f)} <= f(0) for centered f.

    Returns (lower_gap, upper_gap), both nonnegative for centered
    log-concave f; raises on non-centered input since the sandwich needs
    the barycenter at the origin. Both gaps vanish simultaneously for f0.
    """
    core = _core(f, **kw)
    bar_norm = float(np.linalg.norm(core.bar))
    if bar_norm > tol:
        raise InputError(
            f"jensen sandwich requires a centered function (barycenter norm {bar_norm:.3g})"
        )
    n = f.dim
    emh = math.exp(-core.mean_phi)
    lower = emh - math.exp(-core.min_phi - n)
    upper = float(f.value(np.zeros(n))) - emh
    return lower, upper


# ---------------------------------------------------------------------------
# the entropy-sum scan
# ---------------------------------------------------------------------------


def entropy_sum_closed(t):
    """Closed S(t) = h(f^t) + h((f^t)°) for the heavy-tailed cube extension:
    1/(t+1) + 1 - t/(e^t - 1)."""
    t = float(t)
    if t <= 0:
        raise InputError("entropy sum needs t > 0")
    return 1.0 / (t + 1.0) + 1.0 - t / math.expm1(t)


@dataclass
class Question4Scan:
    ts: np.ndarray
    s_closed: np.ndarray
    s_numeric: np.ndarray
    t_star: float

    @property
    def max_deviation(self):
        return float(np.max(np.abs(self.s_closed - self.s_numeric)))


def _entropy_sum_numeric(t, h):
    """Grid-quadrature S(t): separate lattices per side, kinks on nodes."""
    f = power(make_builtin("counterexample", 1), t)
    hp = 1.0 / math.ceil(1.0 / h)
    reach = 1.0 + hp * math.ceil((TAIL_GAP + 5.0) / t / hp)
    primal = analyze(discretize(f, [[-reach, reach]], [hp]))
    # the polar is e^{-|y|} on [-t, t]: put the support edges and the origin
    # kink on nodes, one +inf cell outside each edge
    hd = t / math.ceil(t / (h / 10.0))
    dual = analyze(discretize(polar(f), [[-t - hd, t + hd]], [hd]))
    return primal.mean_phi + dual.mean_phi


def question4_scan(t_lo=0.25, t_hi=6.0, steps=24, h=5e-4, threads=1):
    """Scan S(t) = h(f^t) + h((f^t)°) for the heavy-tailed cube extension.

    Computes the closed form and an independent grid-quadrature value at
    each t, plus the crossing point t* of S(t) = 1, equivalently
    e^t = 1 + t + t^2, found by bisection on [1, 3] to 1e-10. Beyond t*
    the entropy sum exceeds n = 1. The grid pass parallelizes per point
    over ``threads`` workers; each point is computed independently, so the
    output does not depend on the worker count.
    """
    if not (0.0 < t_lo < t_hi):
        raise InputError("scan needs 0 < t_lo < t_hi")
    if steps < 2:
        raise InputError("scan needs at least 2 steps")
    ts = np.linspace(t_lo, t_hi, steps)
    s_closed = np.array([entropy_sum_closed(t) for t in ts])
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            s_numeric = np.array(list(pool.map(lambda t: _entropy_sum_numeric(t, h), ts)))
    else:
        s_numeric = np.array([_entropy_sum_numeric(t, h) for t in ts])
    lo, hi = 1.0, 3.0
    for _ in range(60):
        if hi - lo <= 1e-10:
            break
        mid = 0.5 * (lo + hi)
        if math.expm1(mid) - mid - mid * mid <= 0.0:
            lo = mid
        else:
            hi = mid
    return Question4Scan(ts, s_closed, s_numeric, 0.5 * (lo + hi))
