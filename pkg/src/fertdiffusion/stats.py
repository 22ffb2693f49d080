"""Statistical machinery: fit errors, logistic S-curve fitting, two-sample KS,
Gaussian KDE, diffusion timing metrics and Monte Carlo convergence.

Trajectory-indexed helpers take an optional ``years`` vector; without it
the first element is year 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import trapezoid


class StatsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Error metrics


@dataclass(frozen=True)
class FitMetrics:
    rmse: float
    mae: float
    r2: float


def fit_metrics(observed: Sequence[float], simulated: Sequence[float]) -> FitMetrics:
    y = np.asarray(observed, dtype=float)
    yhat = np.asarray(simulated, dtype=float)
    if y.shape != yhat.shape:
        raise StatsError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise StatsError("need at least one observation")
    resid = y - yhat
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise StatsError("observed series has zero variance; R^2 undefined")
    return FitMetrics(
        rmse=float(np.sqrt(np.mean(resid**2))),
        mae=float(np.mean(np.abs(resid))),
        r2=float(1.0 - np.sum(resid**2) / ss_tot),
    )


def rmse(observed: Sequence[float], simulated: Sequence[float]) -> float:
    """RMSE alone; unlike :func:`fit_metrics` it accepts a constant observed series."""
    y = np.asarray(observed, dtype=float)
    yhat = np.asarray(simulated, dtype=float)
    if y.shape != yhat.shape or y.size == 0:
        raise StatsError("rmse needs two non-empty series of equal length")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


# ---------------------------------------------------------------------------
# Logistic S-curve


@dataclass(frozen=True)
class LogisticFit:
    K: float
    r: float
    t0: float
    residual_rmse: float
    iterations: int = 0
    converged: bool = True

    def __call__(self, t):
        return logistic(t, self.K, self.r, self.t0)


def logistic(t, K: float, r: float, t0: float):
    t = np.asarray(t, dtype=float)
    return K / (1.0 + np.exp(-r * (t - t0)))


def _logistic_jacobian(t: np.ndarray, K: float, r: float, t0: float) -> np.ndarray:
    e = np.exp(-r * (t - t0))
    s = 1.0 / (1.0 + e)
    ds = s * s * e  # d s / d(r (t - t0))
    return np.column_stack([s, K * ds * (t - t0), -K * ds * r])


def fit_logistic(
    adoption: Sequence[float],
    years: Sequence[float] | None = None,
    *,
    grid_size: int = 25,
    max_steps: int = 500,
    gtol: float = 1e-8,
) -> LogisticFit:
    """Least-squares fit of ``K / (1 + exp(-r (t - t0)))``.

    A coarse grid over ``K in [max(y), 1]``, ``r in (0, 3]`` and ``t0`` over
    the observed year span seeds a Levenberg-Marquardt refinement that keeps
    ``0 < K <= 1`` and ``r > 0``.
    """
    y = np.asarray(adoption, dtype=float)
    t = np.arange(1, len(y) + 1, dtype=float) if years is None else np.asarray(years, dtype=float)
    if y.size < 4:
        raise StatsError("logistic fit needs at least 4 points")
    if t.shape != y.shape:
        raise StatsError("years and adoption differ in length")
    if np.any((y < 0) | (y > 1)) or not np.all(np.isfinite(y)):
        raise StatsError("adoption values must lie in [0, 1]")
    if np.ptp(y) == 0:
        raise StatsError("constant series: logistic parameters are not identifiable")

    t_lo = max(1.0, float(t.min()))
    t_hi = max(t_lo + 1.0, float(t.max()))
    Ks = np.linspace(max(y.max(), 1e-6), 1.0, grid_size)
    rs = np.linspace(3.0 / grid_size, 3.0, grid_size)
    t0s = np.linspace(t_lo, t_hi, 2 * grid_size)
    KK, RR, TT = np.meshgrid(Ks, rs, t0s, indexing="ij")
    curves = KK[..., None] / (1.0 + np.exp(-RR[..., None] * (t - TT[..., None])))
    sse = np.sum((curves - y) ** 2, axis=-1)
    best = np.unravel_index(np.argmin(sse), sse.shape)
    theta = np.array([KK[best], RR[best], TT[best]])

    def sse_of(p: np.ndarray) -> float:
        return float(np.sum((logistic(t, *p) - y) ** 2))

    lam = 1e-3
    cur = sse_of(theta)
    steps = 0
    converged = False
    for steps in range(1, max_steps + 1):
        resid = logistic(t, *theta) - y
        J = _logistic_jacobian(t, *theta)
        grad = J.T @ resid
        if np.linalg.norm(grad) < gtol:
            converged = True
            break
        JTJ = J.T @ J
        improved = False
        while lam < 1e12:
            A = JTJ + lam * np.diag(np.maximum(np.diag(JTJ), 1e-12))
            try:
                step = np.linalg.solve(A, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = theta + step
            cand[0] = min(max(cand[0], 1e-9), 1.0)
            cand[1] = max(cand[1], 1e-9)
            new = sse_of(cand)
            if new < cur:
                theta, cur = cand, new
                lam = max(lam / 3.0, 1e-12)
                improved = True
                break
            lam *= 2.0
        if not improved:
            # No descent direction left within the bounds.
            converged = True
            break
    K, r, t0 = (float(v) for v in theta)
    return LogisticFit(K=K, r=r, t0=t0, residual_rmse=math.sqrt(cur / y.size), iterations=steps, converged=converged)


# ---------------------------------------------------------------------------
# Two-sample Kolmogorov-Smirnov


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float
    n: int
    m: int
    method: str = "asymptotic"


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """Sup distance between the two empirical CDFs, evaluated at every pooled point."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def kolmogorov_sf(lam: float, tol: float = 1e-12, max_terms: int = 100) -> float:
    """Asymptotic Kolmogorov survival function ``2 sum (-1)^(j-1) exp(-2 j^2 lam^2)``."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for j in range(1, max_terms + 1):
        term = 2.0 * (-1) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < tol:
            return min(max(total, np.finfo(float).tiny), 1.0)
    # Series failed to settle: only happens for lam near 0, where p -> 1.
    return 1.0


def _exact_ks_pvalue(n: int, m: int, d: float) -> float:
    """P(D >= d) under H0 by counting monotone lattice paths inside the band."""
    if d <= 0:
        return 1.0
    # Paths (i, j) from (0,0) to (n,m) with |i/n - j/m| < d stay "inside".
    # Small slack keeps float ties on the boundary counted as exceedances.
    eps = 1e-12
    inside = np.zeros((n + 1, m + 1), dtype=float)
    for i in range(n + 1):
        for j in range(m + 1):
            if abs(i / n - j / m) >= d - eps:
                continue
            if i == 0 and j == 0:
                inside[i, j] = 1.0
                continue
            inside[i, j] = (inside[i - 1, j] if i else 0.0) + (inside[i, j - 1] if j else 0.0)
    total = math.comb(n + m, n)
    return float(min(1.0, max(0.0, 1.0 - inside[n, m] / total)))


def ks_two_sample(a: Sequence[float], b: Sequence[float], method: str = "asymptotic") -> KsResult:
    """Two-sided two-sample KS test.

    ``method="asymptotic"`` uses the Kolmogorov distribution at
    ``lam = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * D`` with ``ne = nm/(n+m)``.
    ``method="exact"`` counts lattice paths and is limited to samples of 30.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise StatsError("KS test needs two non-empty samples")
    d = ks_statistic(a, b)
    n, m = a.size, b.size
    if method == "asymptotic":
        ne = n * m / (n + m)
        sq = math.sqrt(ne)
        p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
    elif method == "exact":
        if n > 30 or m > 30:
            raise StatsError("exact KS p-value is limited to samples of at most 30")
        p = max(_exact_ks_pvalue(n, m, d), np.finfo(float).tiny)
    else:
        raise StatsError(f"unknown KS method {method!r}")
    return KsResult(d_statistic=d, p_value=p, n=n, m=m, method=method)


# ---------------------------------------------------------------------------
# Kernel density


_KDE_CHUNK = 1 << 22  # grid-by-sample cells evaluated per block
_MAX_UNIFORM_GRID = 1 << 16


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(trapezoid(self.density, self.grid))


def silverman_bandwidth(sample: Sequence[float]) -> float:
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise StatsError("bandwidth needs at least 2 points")
    sd = float(np.std(x, ddof=1))
    if sd <= 0:
        raise StatsError("degenerate sample: zero standard deviation")
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    return 0.9 * spread * x.size ** (-0.2)


def _density_grid(x: np.ndarray, h: float, min_points: int) -> np.ndarray:
    lo, hi = x.min() - 4 * h, x.max() + 4 * h
    needed = int(math.ceil(3 * (hi - lo) / h)) + 1
    if needed <= max(min_points, _MAX_UNIFORM_GRID):
        return np.linspace(lo, hi, max(min_points, needed))
    # Kernels much narrower than the data range: a coarse grid for the span
    # plus a fine patch around every sample point.
    offsets = np.linspace(-9 * h, 9 * h, 55)
    return np.unique(np.concatenate([np.linspace(lo, hi, min_points), (x[:, None] + offsets[None, :]).ravel()]))


def kde(sample: Sequence[float], grid_spec: int | Sequence[float] = 512, bandwidth: float | None = None) -> DensityEstimate:
    """Gaussian KDE with Silverman bandwidth.

    ``grid_spec`` is either explicit evaluation points or a minimum point
    count for a grid spanning the data padded by four bandwidths. Integer
    grids are refined until the spacing near every sample point is at most
    a third of the bandwidth, so the tabulated density integrates to one.
    """
    x = np.asarray(sample, dtype=float)
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise StatsError("bandwidth must be positive")
    if np.ndim(grid_spec) == 0:
        if h < 1e3 * np.finfo(float).eps * max(1.0, float(np.abs(x).max())):
            raise StatsError(f"bandwidth {h:.3g} is below floating-point resolution of the sample")
        grid = _density_grid(x, h, int(grid_spec))
    else:
        grid = np.asarray(grid_spec, dtype=float)
    dens = np.empty(grid.size)
    step = max(1, _KDE_CHUNK // max(x.size, 1))
    norm = x.size * h * math.sqrt(2 * math.pi)
    for start in range(0, grid.size, step):
        z = (grid[start : start + step, None] - x[None, :]) / h
        dens[start : start + step] = np.exp(-0.5 * z * z).sum(axis=1) / norm
    return DensityEstimate(grid=grid, density=dens, bandwidth=h)


# ---------------------------------------------------------------------------
# Diffusion timing


def _years_for(trajectory: np.ndarray, years: Sequence[float] | None) -> np.ndarray:
    if years is None:
        return np.arange(1, len(trajectory) + 1)
    years = np.asarray(years)
    if years.shape != trajectory.shape:
        raise StatsError("years and trajectory differ in length")
    return years


def threshold_year(trajectory: Sequence[float], x: float, years: Sequence[float] | None = None):
    """First year with adoption at or above ``x``, or ``None``."""
    if not 0.0 < x < 1.0:
        raise StatsError(f"threshold must lie in (0, 1), got {x}")
    a = np.asarray(trajectory, dtype=float)
    yrs = _years_for(a, years)
    hit = np.flatnonzero(a >= x)
    return None if hit.size == 0 else yrs[hit[0]].item()


def peak_velocity(trajectory: Sequence[float], years: Sequence[float] | None = None) -> tuple[float, int]:
    """Largest year-on-year increase and the year it lands in (earliest on ties)."""
    a = np.asarray(trajectory, dtype=float)
    if a.size < 2:
        raise StatsError("peak velocity needs at least 2 points")
    yrs = _years_for(a, years)
    v = np.diff(a)
    i = int(np.argmax(v))
    return float(v[i]), yrs[i + 1].item()


@dataclass(frozen=True)
class DiffusionMetrics:
    t50: float | None
    t90: float | None
    peak_velocity: float
    peak_year: int


def diffusion_metrics(trajectory: Sequence[float], years: Sequence[float] | None = None) -> DiffusionMetrics:
    peak, year = peak_velocity(trajectory, years)
    return DiffusionMetrics(
        t50=threshold_year(trajectory, 0.5, years),
        t90=threshold_year(trajectory, 0.9, years),
        peak_velocity=peak,
        peak_year=year,
    )


# ---------------------------------------------------------------------------
# Convergence and summaries


@dataclass(frozen=True)
class ConvergenceReport:
    running_mean: np.ndarray
    final_mean: float
    cv: float

    def max_relative_deviation(self, start: int) -> float:
        """Largest ``|running_mean[k] / final - 1|`` for iterations ``k >= start`` (1-based)."""
        tail = self.running_mean[start - 1 :]
        return float(np.max(np.abs(tail / self.final_mean - 1.0)))


def convergence(per_run_totals: Sequence[float]) -> ConvergenceReport:
    x = np.asarray(per_run_totals, dtype=float)
    if x.size < 2:
        raise StatsError("convergence needs at least 2 runs")
    mean = float(x.mean())
    if mean == 0:
        raise StatsError("mean of totals is zero; CV undefined")
    running = np.cumsum(x) / np.arange(1, x.size + 1)
    return ConvergenceReport(running_mean=running, final_mean=mean, cv=float(np.std(x, ddof=1) / abs(mean)))


@dataclass(frozen=True)
class SampleSummary:
    mean: float
    variance: float
    tail_mass: float
    threshold: float


def summarize(sample: Sequence[float], threshold: float = 1.25) -> SampleSummary:
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise StatsError("cannot summarise an empty sample")
    var = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
    return SampleSummary(mean=float(x.mean()), variance=var, tail_mass=float(np.mean(x > threshold)), threshold=threshold)


__all__ = [
    "ConvergenceReport",
    "DensityEstimate",
    "DiffusionMetrics",
    "FitMetrics",
    "KsResult",
    "LogisticFit",
    "SampleSummary",
    "StatsError",
    "convergence",
    "diffusion_metrics",
    "fit_logistic",
    "fit_metrics",
    "kde",
    "kolmogorov_sf",
    "ks_statistic",
    "ks_two_sample",
    "logistic",
    "peak_velocity",
    "rmse",
    "silverman_bandwidth",
    "summarize",
    "threshold_year",
]
