"""Significance tests and small regression utilities.

The t distribution goes through a continued-fraction regularized incomplete
beta function, the sign test is exact in integer arithmetic, and studentized
range quantiles come from Gauss-Legendre quadrature of the range
distribution followed by Brent root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .model import LexiEvalError

DEFAULT_ALPHA = 0.05
DEFAULT_ALPHA_GRID = (0.0001, 0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.2)


class UndefinedStatistic(LexiEvalError, ValueError):
    """The statistic does not exist for this input (e.g. zero variance)."""


class ConvergenceError(LexiEvalError, RuntimeError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    df: Optional[float] = None

    __test__ = False  # not a pytest class

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")


@dataclass(frozen=True)
class PairResult:
    """One system pair inside a multiple-comparison procedure."""

    a: str
    b: str
    mean_difference: float
    result: TestResult
    significant: bool


# ---------------------------------------------------------------------------
# t distribution


def _betacf(a: float, b: float, x: float, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ConvergenceError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


def paired_t_test(differences: Sequence[float]) -> TestResult:
    """One-sample t-test of the per-topic differences against zero (two-sided)."""
    d = np.asarray(differences, dtype=float)
    n = d.size
    if n < 2:
        raise ValueError("paired t-test needs at least 2 differences")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TestResult(0.0, 1.0, n, df)
        return TestResult(math.copysign(math.inf, mean), 0.0, n, df)
    t = mean / (sd / math.sqrt(n))
    return TestResult(t, t_two_sided_p(t, df), n, df)


# ---------------------------------------------------------------------------
# sign test


def sign_test_exact(n_pos: int, n_neg: int) -> Fraction:
    if n_pos < 0 or n_neg < 0:
        raise ValueError("counts must be non-negative")
    n = n_pos + n_neg
    if n == 0:
        raise ValueError("sign test needs at least one non-zero preference")
    tail = sum(math.comb(n, k) for k in range(max(n_pos, n_neg), n + 1))
    return min(Fraction(1), Fraction(2 * tail, 2**n))


def sign_test(n_pos: int, n_neg: int) -> TestResult:
    """Exact two-sided binomial test at p = 1/2; ties must already be dropped."""
    p = sign_test_exact(n_pos, n_neg)
    return TestResult(float(n_pos - n_neg), float(p), n_pos + n_neg)


# ---------------------------------------------------------------------------
# studentized range


def _gl_panels(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2.0
    mid = (edges[1:] + edges[:-1]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


_Z_NODES, _Z_WEIGHTS = _gl_panels(-9.0, 9.0, 36, 12)
_PHI_Z = np.exp(-0.5 * _Z_NODES**2) / math.sqrt(2.0 * math.pi)


def _range_cdf_normal(w: np.ndarray, k: int) -> np.ndarray:
    """P(range of k iid standard normals <= w), vectorized over ``w``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    z = _Z_NODES[None, :]
    zw = z - w[:, None]
    # Difference of upper tails on the right half avoids cancellation near 1.
    right = z > 0
    diff = np.where(right, ndtr(-zw) - ndtr(-z), ndtr(z) - ndtr(zw))
    diff = np.clip(diff, 0.0, 1.0)
    integrand = _PHI_Z[None, :] * diff ** (k - 1)
    out = k * integrand @ _Z_WEIGHTS
    out[w <= 0] = 0.0
    return np.clip(out, 0.0, 1.0)


@lru_cache(maxsize=256)
def _scale_nodes(df: float) -> tuple[np.ndarray, np.ndarray]:
    # Quadrature for s = chi_df / sqrt(df), weights include its density.
    spread = 1.0 / math.sqrt(2.0 * df)
    hi = 1.0 + 14.0 * spread
    half = df / 2.0
    log_c = half * math.log(df) - math.lgamma(half) - (half - 1.0) * math.log(2.0)
    if df > 25:
        s, w = _gl_panels(max(0.0, 1.0 - 14.0 * spread), hi, 24, 16)
        log_f = log_c + (df - 1.0) * np.log(s) - half * s * s
        return s, w * np.exp(log_f)
    # Small df: heavy left tail of s, so integrate over u = log s.
    # The density in u decays like exp(df * u); truncate below exp(-32).
    u, w = _gl_panels(-32.0 / df, math.log(hi), 64, 16)
    s = np.exp(u)
    log_f = log_c + df * u - half * s * s
    return s, w * np.exp(log_f)


def studentized_range_cdf(q: float, k: int, df: float) -> float:
    """P(Q <= q) for the studentized range of ``k`` means with ``df`` error df."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if q <= 0:
        return 0.0
    if math.isinf(df):
        return float(_range_cdf_normal(np.array([q]), k)[0])
    if df < 1:
        raise ValueError("df must be >= 1")
    s, w = _scale_nodes(float(df))
    return float(min(1.0, max(0.0, _range_cdf_normal(q * s, k) @ w)))


@lru_cache(maxsize=4096)
def studentized_range_quantile(alpha: float, k: int, df: float, tol: float = 1e-6) -> float:
    """Upper-``alpha`` critical value of the studentized range distribution."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    target = 1.0 - alpha
    hi = 4.0
    while studentized_range_cdf(hi, k, df) < target:
        hi *= 2.0
        if hi > 1e4:
            raise ConvergenceError(f"cannot bracket studentized range quantile (alpha={alpha}, k={k}, df={df})")
    try:
        q, info = brentq(lambda x: studentized_range_cdf(x, k, df) - target,
                         1e-9, hi, xtol=tol * 1e-2, full_output=True)
    except ValueError as exc:
        raise ConvergenceError(f"root finding failed for alpha={alpha}, k={k}, df={df}: {exc}") from None
    if not info.converged:
        raise ConvergenceError(
            f"studentized range quantile did not converge (alpha={alpha}, k={k}, df={df}, "
            f"iterations={info.iterations}, last={info.root})")
    return q


def tukey_hsd(
    values,
    alpha: float = DEFAULT_ALPHA,
    names: Optional[Sequence[str]] = None,
    alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
) -> list[PairResult]:
    """Tukey's HSD on a systems x topics matrix, blocking on topics.

    Residual variance comes from the two-way ANOVA without replication, with
    ``(k - 1)(n - 1)`` degrees of freedom.  ``p_value`` is the smallest alpha
    in ``alpha_grid`` (plus ``alpha``) at which the pair is significant, or
    1.0 if none.
    """
    m = np.asarray(values, dtype=float)
    if m.ndim != 2:
        raise ValueError("values must be a systems x topics matrix")
    k, n = m.shape
    if k < 2 or n < 2:
        raise ValueError("Tukey HSD needs at least 2 systems and 2 topics")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix is incomplete (non-finite entries)")
    if names is None:
        names = [str(i) for i in range(k)]
    if len(names) != k:
        raise ValueError("names must match the number of systems")

    sys_means = m.mean(axis=1)
    topic_means = m.mean(axis=0)
    resid = m - sys_means[:, None] - topic_means[None, :] + m.mean()
    df = (k - 1) * (n - 1)
    mse = float((resid**2).sum()) / df
    scale = float(np.abs(m).max()) or 1.0
    degenerate = mse <= (1e-13 * scale) ** 2

    grid = sorted(set(alpha_grid) | {alpha})
    crit = {a: studentized_range_quantile(a, k, df) for a in grid}
    se = math.sqrt(mse / n)
    mean_tol = 1e-12 * scale

    out = []
    for i, j in combinations(range(k), 2):
        diff = float(sys_means[i] - sys_means[j])
        if degenerate:
            stat = 0.0 if abs(diff) <= mean_tol else math.inf
        else:
            stat = abs(diff) / se
        p = next((a for a in grid if stat >= crit[a]), 1.0)
        out.append(PairResult(names[i], names[j], diff,
                              TestResult(stat, p, n, df), stat >= crit[alpha]))
    return out


# ---------------------------------------------------------------------------
# misc


def bonferroni(p_values: Sequence[float]) -> list[float]:
    m = len(p_values)
    return [min(1.0, p * m) for p in p_values]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    if x.size < 2:
        raise UndefinedStatistic("Pearson correlation needs n >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if np.all(x == x[0]) or np.all(y == y[0]) or sxx == 0.0 or syy == 0.0:
        raise UndefinedStatistic("Pearson correlation undefined for zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def ols(X, y) -> np.ndarray:
    """Least-squares coefficients via a QR decomposition of ``X``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n x p and y length n")
    n, p = X.shape
    if n <= p:
        raise UndefinedStatistic(f"OLS needs n > p (n={n}, p={p})")
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() <= max(n, p) * np.finfo(float).eps * diag.max():
        raise UndefinedStatistic("design matrix is rank deficient")
    return np.linalg.solve(R, Q.T @ y)


def add_intercept(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])
