"""Coefficient-recovery metrics, AUC and cross-validated early stopping."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._errors import ValidationError
from .boosting import BoostConfig, fit, risk
from .design import GroupedDesign


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    correct_effects: float | None
    correct_zeros: float | None
    correct_classified: float
    mse: float | None = None
    auc: float | None = None


def rmse(beta_true, beta_hat) -> float:
    """``sqrt(sum((beta - beta_hat)**2)) / p`` (the 1/p sits outside the root)."""
    b, bh = np.asarray(beta_true, float), np.asarray(beta_hat, float)
    if b.shape != bh.shape or b.ndim != 1 or b.size < 1:
        raise ValidationError("beta vectors must be 1-d and of equal, nonzero length")
    return float(np.sqrt(np.sum((b - bh) ** 2)) / b.size)


def detection_rates(beta_true, beta_hat, zero_tol: float = 0.0, selected=None) -> dict:
    """Proportions of correctly detected effects and zeros.

    A coefficient counts as selected when ``|beta_hat_j| > zero_tol``, or,
    when a boolean `selected` mask is given (e.g. "ever updated by
    boosting"), from that mask.  A rate with an empty denominator is None.
    """
    b = np.asarray(beta_true, float)
    if selected is None:
        sel = np.abs(np.asarray(beta_hat, float)) > zero_tol
    else:
        sel = np.asarray(selected, bool)
    if sel.shape != b.shape:
        raise ValidationError("length mismatch between true and estimated coefficients")
    eff = b != 0
    tp = int(np.sum(eff & sel))
    tn = int(np.sum(~eff & ~sel))
    n_eff, n_zero = int(eff.sum()), int((~eff).sum())
    return {
        "correct_effects": tp / n_eff if n_eff else None,
        "correct_zeros": tn / n_zero if n_zero else None,
        "correct_classified": (tp + tn) / b.size,
    }


def metric_report(beta_true, beta_hat, selected=None, zero_tol: float = 0.0) -> MetricReport:
    rates = detection_rates(beta_true, beta_hat, zero_tol, selected)
    return MetricReport(rmse(beta_true, beta_hat), **rates)


def auc(labels, scores) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    y = np.asarray(labels)
    s = np.asarray(scores, float)
    pos = y == 1
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n1 == 0 or n0 == 0:
        raise ValidationError("AUC needs both classes present")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2) / (n1 * n0))


@dataclass(frozen=True)
class CvResult:
    risk: np.ndarray  # mean validation risk at m = 1..M
    best_m: int
    folds: np.ndarray  # fold id of every observation
    fold_risk: np.ndarray  # (k, M)
    risk_type: str

    def risk_at(self, m: int) -> float:
        return float(self.risk[m - 1])


def fold_assignment(n: int, k: int, seed: int) -> np.ndarray:
    """Shuffled fold ids ``0..k-1``; fold sizes differ by at most one."""
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.empty(n, dtype=int)
    folds[perm] = np.arange(n) % k
    return folds


def _fold_risk(gd, y, config, folds, i):
    train, test = folds != i, folds == i
    if config.loss == "logistic":
        for part, name in ((train, "training"), (test, "validation")):
            if np.unique(y[part]).size < 2:
                raise ValidationError(f"fold {i + 1}: {name} part has a single class")
    res = fit(gd.subset_rows(train), y[train], config)
    f = res.offset + gd.X[test] @ res.beta_path[1:].T
    return risk(config.loss, y[test], f)


def kfold_cv(gd: GroupedDesign, y, config: BoostConfig, k: int = 3, seed: int = 0,
             threads: int = 1) -> CvResult:
    """Validation risk at every iteration, averaged over `k` folds.

    ``best_m`` is the smallest iteration attaining the minimal mean risk.
    """
    y = np.asarray(y, float)
    n = gd.n
    if not 2 <= k <= n:
        raise ValidationError(f"need 2 <= k <= n, got k={k}, n={n}")
    folds = fold_assignment(n, k, seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            per = list(ex.map(lambda i: _fold_risk(gd, y, config, folds, i), range(k)))
    else:
        per = [_fold_risk(gd, y, config, folds, i) for i in range(k)]
    fold_risk = np.vstack(per)
    mean = fold_risk.mean(axis=0)
    best = int(np.argmin(mean)) + 1
    rtype = "squared_error" if config.loss == "l2" else "negative_log_likelihood"
    return CvResult(mean, best, folds, fold_risk, rtype)


def alpha_grid_search(gd: GroupedDesign, y, base_config: BoostConfig, alphas, k: int = 3,
                      seed: int = 0, threads: int = 1):
    """Cross-validate every alpha; returns ``(rows, best_row)``.

    Rows are ``(alpha, best_m, cv_risk)``.  The winner has minimal risk,
    ties going to the smaller alpha.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValidationError("alpha grid is empty")
    if len(set(alphas)) != len(alphas):
        raise ValidationError("duplicate alpha values in grid")
    if any(not 0 <= a <= 1 for a in alphas):
        raise ValidationError("alpha values must lie in [0, 1]")
    rows = []
    for a in alphas:
        cv = kfold_cv(gd, y, base_config.replace(alpha=a), k, seed, threads)
        rows.append((a, cv.best_m, cv.risk_at(cv.best_m)))
    best = min(rows, key=lambda r: (r[2], r[0]))
    return rows, best
