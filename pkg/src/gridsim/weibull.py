"""Weibull distributions: density, sampling, MLE, and mixture fitting.

Single-component fits solve the profile-likelihood shape equation

    sum(x^k ln x) / sum(x^k) - 1/k - mean(ln x) = 0

whose left side is strictly increasing in k for non-degenerate data, so
a bracketed Newton iteration on k in [1e-3, 1e3] is reliable; the scale
then follows in closed form. Multi-mode distributions are modeled as
finite Weibull mixtures fitted by expectation-maximization with seeded
restarts: responsibilities from log-densities (log-sum-exp), weights
from mean responsibility, components by responsibility-weighted MLE.

All heavy arithmetic is vectorized with numpy; exp/log rescaling keeps
x^k sums finite across the whole shape bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, FitError

__all__ = [
    "WeibullParams",
    "MixtureModel",
    "FitOptions",
    "MixtureFit",
    "pdf",
    "cdf",
    "sample",
    "fit_mle",
    "fit_mixture",
    "log_likelihood",
    "ks_statistic",
]

_SHAPE_LO = 1e-3
_SHAPE_HI = 1e3
# Inner Newton/bisection budget. The bracket-width exit needs at most
# ~70 halvings, so this is never the binding limit on healthy data; it
# is deliberately not opts.max_iterations, which caps EM sweeps only.
_SHAPE_MAX_ITERS = 200


@dataclass(frozen=True)
class WeibullParams:
    """Shape k and scale lambda of one Weibull component."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise DomainError(f"shape must be finite and > 0 (got {self.shape!r})")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise DomainError(f"scale must be finite and > 0 (got {self.scale!r})")


@dataclass(frozen=True)
class MixtureModel:
    """Weighted Weibull components; weights sum to 1."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), p) for w, p in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ConfigurationError("mixture needs at least one component")
        for w, p in comps:
            if not 0.0 <= w <= 1.0:
                raise ConfigurationError(f"component weight {w!r} outside [0, 1]")
            if not isinstance(p, WeibullParams):
                raise ConfigurationError("components must hold WeibullParams")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"weights sum to {total!r}, not 1")

    def pdf(self, x):
        out = 0.0
        for w, p in self.components:
            out = out + w * pdf(x, p)
        return out

    def cdf(self, x):
        out = 0.0
        for w, p in self.components:
            out = out + w * cdf(x, p)
        return out


@dataclass(frozen=True)
class FitOptions:
    """Stopping and restart controls for fitting.

    tolerance bounds the shape-equation residual (MLE) and the relative
    log-likelihood change per iteration (EM). seed drives the EM restart
    jitter, making every fit reproducible.
    """

    tolerance: float = 1e-8
    max_iterations: int = 500
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise ConfigurationError("restarts must be >= 1")


@dataclass(frozen=True)
class MixtureFit:
    """A fitted mixture plus how the fit went.

    trace is the log-likelihood after each EM iteration of the winning
    restart (non-decreasing, up to 1e-9 slack); converged is False when
    the iteration cap stopped it first.
    """

    model: MixtureModel
    log_likelihood: float
    converged: bool
    n_iterations: int
    trace: tuple


def _as_positive_array(samples, minimum: int) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        x = x.reshape(-1)
    if x.size < minimum:
        raise FitError(f"need at least {minimum} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    if np.any(x <= 0.0):
        raise DomainError("samples must be > 0 for Weibull fitting")
    return x


def pdf(x, p: WeibullParams):
    """Weibull density (k/lam)(x/lam)^(k-1) exp(-(x/lam)^k).

    Accepts scalars or arrays over x >= 0. At x = 0 the density is 1/lam
    for k = 1, zero for k > 1, and divergent (+inf) for k < 1.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("pdf domain is x >= 0")
    k, lam = p.shape, p.scale
    z = arr / lam
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = (k / lam) * z ** (k - 1.0) * np.exp(-(z**k))
    if k == 1.0:
        out = np.where(arr == 0.0, 1.0 / lam, out)
    elif k > 1.0:
        out = np.where(arr == 0.0, 0.0, out)
    else:
        out = np.where(arr == 0.0, np.inf, out)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def cdf(x, p: WeibullParams):
    """Weibull CDF 1 - exp(-(x/lam)^k); cdf(scale) = 1 - 1/e for every k."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("cdf domain is x >= 0")
    with np.errstate(over="ignore"):
        out = -np.expm1(-((arr / p.scale) ** p.shape))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def sample(p: WeibullParams, rng: np.random.Generator, size=None):
    """Inverse-CDF sampling: lam * (-log1p(-u))^(1/k) with u in [0, 1).

    Exact inverse of cdf() as implemented (both go through expm1/log1p),
    so empirical CDFs of large samples sit inside tight KS bands.
    """
    u = rng.random(size)
    x = p.scale * (-np.log1p(-u)) ** (1.0 / p.shape)
    if size is None:
        return float(x)
    return x


def _logpdf(x: np.ndarray, k: float, lam: float) -> np.ndarray:
    """Log density over strictly positive x, overflow-safe."""
    lz = np.log(x) - math.log(lam)
    with np.errstate(over="ignore"):
        return math.log(k) - math.log(lam) + (k - 1.0) * lz - np.exp(k * lz)


def _weighted_shape_fit(y: np.ndarray, w: np.ndarray, opts: FitOptions) -> float:
    """Solve the weighted profile shape equation by safeguarded Newton.

    y = ln x. The equation residual A(k) - 1/k - mean_w(y) is strictly
    increasing (its derivative is a weighted variance plus 1/k^2), so the
    bracket [1e-3, 1e3] shrinks monotonically and Newton steps outside it
    fall back to bisection.
    """
    wsum = float(w.sum())
    ybar = float((w * y).sum()) / wsum
    with np.errstate(divide="ignore"):
        lw = np.log(w)  # -inf where a responsibility is exactly 0

    def residual(k: float):
        # Scale inside log space with the weights folded in, so the
        # largest *weighted* term is exp(0); zero-weight samples cannot
        # underflow the sums no matter how extreme k gets.
        t = lw + k * y
        m = float(t.max())
        e = np.exp(t - m)
        s0 = float(e.sum())
        s1 = float((e * y).sum())
        s2 = float((e * y * y).sum())
        a1 = s1 / s0
        g = a1 - 1.0 / k - ybar
        gp = (s2 / s0 - a1 * a1) + 1.0 / (k * k)
        return g, gp

    lo, hi = _SHAPE_LO, _SHAPE_HI
    g_lo, _ = residual(lo)
    g_hi, _ = residual(hi)
    if g_lo >= 0.0 or g_hi <= 0.0:
        raise FitError(
            "degenerate data: shape equation has no root in [1e-3, 1e3] "
            "(samples nearly all equal)"
        )
    # Moment start: shape ~ pi / (sqrt(6) * std(ln x)).
    var = float((w * (y - ybar) ** 2).sum()) / wsum
    k = math.pi / math.sqrt(6.0 * var) if var > 0 else 1.0
    k = min(max(k, lo * 2.0), hi * 0.5)
    for _ in range(_SHAPE_MAX_ITERS):
        g, gp = residual(k)
        if abs(g) < opts.tolerance:
            return k
        if g < 0.0:
            lo = k
        else:
            hi = k
        step = k - g / gp
        k = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-14 * hi:
            return 0.5 * (lo + hi)
    raise FitError("shape fit did not converge")


def _weighted_scale(y: np.ndarray, w: np.ndarray, k: float) -> float:
    """Closed-form weighted scale: (sum w x^k / sum w)^(1/k), log-scaled."""
    with np.errstate(divide="ignore"):
        t = np.log(w) + k * y
    m = float(t.max())
    s0 = float(np.exp(t - m).sum())
    return math.exp((m + math.log(s0) - math.log(float(w.sum()))) / k)


def fit_mle(samples, opts: FitOptions | None = None,
            fixed_shape: float | None = None) -> WeibullParams:
    """Maximum-likelihood Weibull fit of positive samples.

    With fixed_shape the shape equation is skipped and only the
    closed-form scale is estimated (fixed_shape=1 gives the exponential
    MLE, scale = sample mean). Raises FitError on all-equal samples (the
    shape estimate diverges) and DomainError on non-positive ones.
    """
    opts = opts or FitOptions()
    x = _as_positive_array(samples, 10)
    y = np.log(x)
    w = np.ones_like(x)
    if fixed_shape is not None:
        if not fixed_shape > 0:
            raise DomainError("fixed_shape must be > 0")
        return WeibullParams(fixed_shape, _weighted_scale(y, w, fixed_shape))
    if float(x.max()) == float(x.min()):
        raise FitError("degenerate data: all samples equal")
    k = _weighted_shape_fit(y, w, opts)
    return WeibullParams(k, _weighted_scale(y, w, k))


def log_likelihood(samples, model: MixtureModel) -> float:
    """Sum of log mixture densities; raises if any sample has no density."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if np.any(x < 0.0):
        raise DomainError("samples must be >= 0")
    ll = _loglik_matrix(x, model.components)[1]
    if not math.isfinite(ll):
        raise FitError("sample with zero density under the model")
    return ll


def _loglik_matrix(x: np.ndarray, components) -> tuple:
    """Per-sample log mixture densities; returns (log-sum rows, total).

    Rows where every component underflows propagate -inf into the total,
    which callers treat as a failed configuration.
    """
    cols = []
    for w, p in components:
        lw = math.log(w) if w > 0.0 else -math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            col = lw + _logpdf(x, p.shape, p.scale)
        cols.append(col)
    mat = np.column_stack(cols)
    m = mat.max(axis=1)
    safe_m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        rows = safe_m + np.log(np.exp(mat - safe_m[:, None]).sum(axis=1))
    rows = np.where(np.isfinite(m), rows, -np.inf)
    return rows, float(rows.sum())


def ks_statistic(samples, model: MixtureModel) -> float:
    """Kolmogorov-Smirnov distance between samples and the mixture CDF."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if x.size == 0:
        raise DomainError("need at least one sample")
    if np.any(x < 0.0):
        raise DomainError("samples must be >= 0")
    n = x.size
    f = model.cdf(x)
    steps = np.arange(1, n + 1) / n
    return float(max((steps - f).max(), (f - (steps - 1.0 / n)).max()))


def _em_once(x, y, n_modes, shapes, scales, weights, opts):
    """One EM run from a given initialization.

    Returns (ll, shapes, scales, weights, converged, iterations, trace)
    or None when the run collapses (component starved below two
    effective samples, or a zero-density configuration).
    """
    n = x.size
    trace = []
    ll_prev = -math.inf
    converged = False
    it = 0
    for it in range(1, opts.max_iterations + 1):
        comps = [(weights[j], WeibullParams(shapes[j], scales[j]))
                 for j in range(n_modes)]
        rows, ll = _loglik_matrix(x, comps)
        if not math.isfinite(ll):
            return None
        trace.append(ll)
        if math.isfinite(ll_prev) and \
                abs(ll - ll_prev) <= opts.tolerance * (abs(ll_prev) + 1.0):
            converged = True
            break
        ll_prev = ll
        # Responsibilities and the M-step.
        cols = []
        for w, p in comps:
            lw = math.log(w) if w > 0.0 else -math.inf
            cols.append(lw + _logpdf(x, p.shape, p.scale))
        mat = np.column_stack(cols)
        resp = np.exp(mat - rows[:, None])
        for j in range(n_modes):
            r = resp[:, j]
            if float(r.sum()) < 2.0:
                return None
            try:
                shapes[j] = _weighted_shape_fit(y, r, opts)
            except FitError:
                return None
            scales[j] = _weighted_scale(y, r, shapes[j])
            weights[j] = float(r.sum()) / n
    if not converged:
        # Score the parameters the final M-step produced, so the reported
        # likelihood always matches the returned model.
        comps = [(weights[j], WeibullParams(shapes[j], scales[j]))
                 for j in range(n_modes)]
        _rows, ll = _loglik_matrix(x, comps)
        if not math.isfinite(ll):
            return None
        trace.append(ll)
    return trace[-1], shapes, scales, weights, converged, it, trace


def fit_mixture(samples, n_modes: int, opts: FitOptions | None = None) -> MixtureFit:
    """Fit an n_modes Weibull mixture by EM with seeded restarts.

    Components are initialized at shape 1 with quantile-spread scales;
    restarts beyond the first jitter the scales. The best restart by
    final log-likelihood wins; its components come back sorted by scale.
    A fit that hits max_iterations is returned with converged=False.
    """
    opts = opts or FitOptions()
    if n_modes < 1:
        raise ConfigurationError("n_modes must be >= 1")
    x = _as_positive_array(samples, 10 * n_modes)
    if n_modes == 1:
        params = fit_mle(x, opts)
        model = MixtureModel(((1.0, params),))
        ll = log_likelihood(x, model)
        return MixtureFit(model, ll, True, 1, (ll,))

    y = np.log(x)
    rng = np.random.default_rng(opts.seed)
    base_scales = np.quantile(x, (2.0 * np.arange(n_modes) + 1.0) / (2.0 * n_modes))
    base_scales = np.maximum(base_scales, float(x.min()))
    # Break quantile ties so components start distinct.
    base_scales = base_scales * (1.0 + 1e-6 * np.arange(n_modes))

    best = None
    for restart in range(opts.restarts):
        scales = base_scales.copy()
        if restart > 0:
            scales = scales * np.exp(rng.normal(0.0, 0.3, n_modes))
        shapes = np.ones(n_modes)
        weights = np.full(n_modes, 1.0 / n_modes)
        result = _em_once(x, y, n_modes, shapes, scales, weights, opts)
        if result is None:
            continue
        ll = result[0]
        if best is None or ll > best[0]:
            best = result
    if best is None:
        raise FitError("every EM restart collapsed; try fewer modes")

    ll, shapes, scales, weights, converged, iterations, trace = best
    order = np.argsort(scales)
    comps = tuple(
        (float(weights[j]), WeibullParams(float(shapes[j]), float(scales[j])))
        for j in order
    )
    # Renormalize away accumulated float drift in the weights.
    total = sum(w for w, _ in comps)
    comps = tuple((w / total, p) for w, p in comps)
    return MixtureFit(MixtureModel(comps), ll, converged, iterations, tuple(trace))
