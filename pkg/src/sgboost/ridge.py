"""Ridge estimates, degrees of freedom and SVD-form residual sums of squares.

Every quantity is computed from a :class:`~sgboost.design.SvdCache`; no
matrix is ever inverted explicitly.  With ``s_j = lam / (d_j**2 + lam)``
the per-direction shrinkage of the hat matrix is ``1 - s_j`` and

    effective df = sum_j 1 - s_j**2        (= tr(2H - H'H))
    trace df     = sum_j 1 - s_j           (= tr(H))

which is numerically preferable to ``2x - x**2`` for small penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._errors import NumericalError, ValidationError
from .design import SvdCache, thin_svd

DF_TOL = 1e-10
MAX_BISECT = 200


@dataclass(frozen=True)
class RidgePenalty:
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValidationError(f"ridge penalty must be finite and >= 0, got {self.lam}")

    def __float__(self):
        return float(self.lam)


def _svd(M) -> SvdCache:
    return M if isinstance(M, SvdCache) else thin_svd(M)


def _lam(lam) -> float:
    return float(RidgePenalty(float(lam)))


def _shrink(d2, lam):
    """``lam / (d2 + lam)`` with the convention 0 at ``lam = 0``."""
    d2 = np.asarray(d2, dtype=float)
    if lam == 0:
        return np.zeros_like(d2)
    return lam / (d2 + lam)


def effective_df(d, lam) -> float:
    """Effective degrees of freedom ``tr(2H - H'H)`` of a ridge fit.

    Parameters
    ----------
    d : array_like
        Positive singular values.
    lam : float
        Ridge penalty, ``>= 0``.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.size == 0 or np.any(d <= 0):
        raise ValidationError("singular values must be nonempty and positive")
    s = _shrink(d ** 2, _lam(lam))
    return float(np.sum(1.0 - s * s))


def trace_df(d, lam) -> float:
    """Trace degrees of freedom ``tr(H)``."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.size == 0 or np.any(d <= 0):
        raise ValidationError("singular values must be nonempty and positive")
    return float(np.sum(1.0 - _shrink(d ** 2, _lam(lam))))


def lambda_for_df_single(d: float, target: float) -> float:
    """Closed-form penalty giving a single column effective df `target`.

    Uses the non-negative root ``d**2 * ((1 - t) + sqrt(1 - t)) / t``.
    """
    if not (0 < target <= 1):
        raise ValidationError(f"df target must lie in (0, 1], got {target}")
    if not d > 0:
        raise ValidationError("singular value must be positive")
    c = 1.0 - target
    return float(d * d * (c + math.sqrt(c)) / target)


def _bisect_df(d, target, df_fn) -> float:
    d = np.atleast_1d(np.asarray(d, dtype=float))
    lo, hi = 0.0, max(float(d[0] ** 2), np.finfo(float).tiny)
    while df_fn(d, hi) >= target:
        hi *= 2.0
        if not math.isfinite(hi):
            raise NumericalError("could not bracket df target")
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if df_fn(d, mid) > target:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    if abs(df_fn(d, lam) - target) > DF_TOL:
        raise NumericalError(
            f"df bisection did not reach tolerance {DF_TOL} (target {target})"
        )
    return lam


def lambda_for_df(d, target: float) -> float:
    """Penalty with ``effective_df(d, lam) == target`` by monotone bisection.

    The upper bracket starts at ``d_1**2`` and doubles until the df drops
    below `target`; bisection then runs to machine resolution.

    Raises
    ------
    ValidationError
        If ``target <= 0`` or ``target >= r``.
    NumericalError
        If the final df misses `target` by more than ``1e-10``.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if not target > 0:
        raise ValidationError(f"df target must be positive, got {target}")
    if target >= d.size:
        raise ValidationError("target exceeds rank")
    return _bisect_df(d, target, effective_df)


def lambda_for_trace_df(d, target: float) -> float:
    """Penalty matching a trace-df target; used to compare the two df notions."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if not 0 < target < d.size:
        raise ValidationError("trace df target must lie in (0, r)")
    return _bisect_df(d, target, trace_df)


def ridge_fit(M, y, lam) -> np.ndarray:
    """Ridge coefficients ``V diag(d / (d**2 + lam)) U' y``.

    `M` may be a matrix or a precomputed SvdCache.
    """
    lam = _lam(lam)
    svd = _svd(M)
    if lam == 0 and isinstance(M, np.ndarray) and svd.r < M.shape[1]:
        raise ValidationError("lambda = 0 requires a full column rank matrix")
    y = np.asarray(y, dtype=float)
    return svd.V @ ((svd.d / (svd.d2 + lam)) * (svd.U.T @ y))


def ridge_fitted(M, y, lam) -> np.ndarray:
    """Fitted values ``H_lam y``."""
    svd = _svd(M)
    keep = 1.0 - _shrink(svd.d2, _lam(lam))
    y = np.asarray(y, dtype=float)
    proj = svd.U.T @ y
    return svd.U @ (keep[:, None] * proj if proj.ndim == 2 else keep * proj)


def rss_one_step(M, y, lam):
    """Residual sum of squares of a single ridge fit, in SVD form.

    ``y`` may be a vector or an ``(n, k)`` matrix of k responses, in which
    case an array of k RSS values is returned.
    """
    svd = _svd(M)
    y = np.asarray(y, dtype=float)
    s = _shrink(svd.d2, _lam(lam))
    w = 1.0 - s * s
    proj = svd.U.T @ y
    if y.ndim == 1:
        return float(y @ y - w @ proj ** 2)
    return np.einsum("ij,ij->j", y, y) - w @ proj ** 2


def boosted_rss(M, y, lam, m: int):
    """RSS ``y'(I - H(m))^2 y`` after ``m + 1`` unit-rate boosting steps.

    ``H(m) = sum_j (1 - s_j**(m+1)) u_j u_j'`` where ``s_j`` is the
    per-direction shrinkage, so the residual keeps ``s_j**(m+1)`` of each
    column-space component and all of the orthogonal complement.
    """
    if int(m) != m or m < 0:
        raise ValidationError("m must be a non-negative integer")
    svd = _svd(M)
    y = np.asarray(y, dtype=float)
    s = _shrink(svd.d2, _lam(lam))
    proj = svd.U.T @ y
    keep = s ** (2 * (int(m) + 1))
    if y.ndim == 1:
        return float(y @ y - proj @ proj + keep @ proj ** 2)
    pp = proj ** 2
    return np.einsum("ij,ij->j", y, y) - pp.sum(0) + keep @ pp
