"""Group-component-wise gradient ridge boosting.

Four learner sets are supported:

``componentwise``
    one ridge learner per column, all with the same df (default 0.5);
``groupwise``
    one ridge learner per group, all with the same df;
``sgb-df``
    individual learners with df ``alpha`` plus group learners with df
    ``1 - alpha``; single-column groups get one learner with df
    ``max(alpha, 1 - alpha)``;
``sgb-lambda``
    individual penalties ``alpha * lambda_base`` and group penalties
    ``(1 - alpha) * lambda_base * sqrt(p_g)``.

Each iteration fits every learner to the pseudo-residuals, keeps the one
with the smallest residual sum of squares (ties go to the smallest
``order_index``: individual learners in column order, then group learners
in group order) and adds ``eta`` times its fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import ValidationError
from .design import GroupedDesign, SvdCache, thin_svd
from .ridge import effective_df, lambda_for_df, lambda_for_df_single

VARIANTS = ("componentwise", "groupwise", "sgb-df", "sgb-lambda")
LOSSES = ("l2", "logistic")
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class BoostConfig:
    """Hyperparameters of one boosting run.

    `df` is the per-learner degrees of freedom of the two baseline variants
    and is ignored by the sparse-group variants.
    """

    variant: str = "sgb-df"
    alpha: float = 0.5
    lambda_base: float | None = None
    eta: float = 0.1
    M: int = 100
    loss: str = "l2"
    df: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.loss not in LOSSES:
            raise ValidationError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.eta <= 1.0:
            raise ValidationError(f"learning rate must lie in (0, 1], got {self.eta}")
        if int(self.M) != self.M or self.M < 1:
            raise ValidationError(f"M must be an integer >= 1, got {self.M}")
        if not self.df > 0:
            raise ValidationError(f"df must be positive, got {self.df}")
        if self.variant == "sgb-lambda":
            if self.lambda_base is None:
                raise ValidationError("sgb-lambda requires lambda_base")
            if not (self.lambda_base > 0 and math.isfinite(self.lambda_base)):
                raise ValidationError("lambda_base must be a positive finite number")

    def replace(self, **kw) -> "BoostConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return BoostConfig(**d)


@dataclass(frozen=True)
class LearnerSpec:
    kind: str  # "individual", "group" or "singleton"
    columns: np.ndarray
    group: int
    penalty: float
    df_target: float | None
    svd: SvdCache
    order_index: int = -1


def _effective_variant(config: BoostConfig) -> tuple[str, float]:
    if config.variant == "sgb-df" and config.alpha == 1.0:
        return "componentwise", 1.0
    if config.variant == "sgb-df" and config.alpha == 0.0:
        return "groupwise", 1.0
    return config.variant, config.df


def _group_lambda(svd: SvdCache, target: float) -> float:
    if svd.r == 1:
        if target > 1:
            raise ValidationError(f"df target {target} exceeds group rank 1")
        return lambda_for_df_single(svd.d[0], target)
    return lambda_for_df(svd.d, target)


def build_learners(gd: GroupedDesign, config: BoostConfig) -> list[LearnerSpec]:
    """Resolve the learner set and every penalty before fitting starts."""
    norms = np.linalg.norm(gd.X, axis=0)
    if np.any(norms == 0):
        j = int(np.flatnonzero(norms == 0)[0])
        raise ValidationError(f"column {j + 1} ({gd.names[j]}) has zero variance")

    variant, base_df = _effective_variant(config)
    a = config.alpha
    indiv: list[LearnerSpec] = []
    groups: list[LearnerSpec] = []

    def single(j, g, kind, lam, df):
        svd = thin_svd(gd.X[:, [j]])
        if lam is None:
            lam = lambda_for_df_single(svd.d[0], df)
        return LearnerSpec(kind, np.array([j]), g, float(lam), df, svd)

    def group(g, lam, df):
        cols = gd.group_cols[g - 1]
        svd = thin_svd(gd.X[:, cols])
        if lam is None:
            lam = _group_lambda(svd, df)
        return LearnerSpec("group", cols, g, float(lam), df, svd)

    if variant == "componentwise":
        indiv = [single(j, int(gd.group_of[j]), "individual", None, base_df) for j in range(gd.p)]
    elif variant == "groupwise":
        groups = [group(g, None, base_df) for g in range(1, gd.G + 1)]
    else:
        for g in range(1, gd.G + 1):
            cols = gd.group_cols[g - 1]
            if cols.size == 1:
                if variant == "sgb-df":
                    indiv.append(single(cols[0], g, "singleton", None, max(a, 1 - a)))
                else:
                    lam = min(a, 1 - a) * config.lambda_base
                    indiv.append(single(cols[0], g, "singleton", lam, None))
                continue
            for j in cols:
                if variant == "sgb-df":
                    indiv.append(single(j, g, "individual", None, a))
                else:
                    indiv.append(single(j, g, "individual", a * config.lambda_base, None))
            if variant == "sgb-df":
                groups.append(group(g, None, 1 - a))
            else:
                groups.append(group(g, (1 - a) * config.lambda_base * math.sqrt(cols.size), None))
        indiv.sort(key=lambda s: int(s.columns[0]))

    out = []
    for k, spec in enumerate(indiv + groups):
        out.append(LearnerSpec(spec.kind, spec.columns, spec.group, spec.penalty,
                               spec.df_target, spec.svd, k))
    return out


def sigmoid(f):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(f, dtype=float)))


def init_offset(loss: str, y) -> float:
    """Constant starting fit: the mean for l2, the log-odds for logistic."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValidationError("empty outcome")
    if loss == "l2":
        return float(y.mean())
    if loss == "logistic":
        if not np.all((y == 0) | (y == 1)):
            raise ValidationError("logistic loss needs a 0/1 outcome")
        ybar = float(y.mean())
        if ybar in (0.0, 1.0):
            raise ValidationError("logistic loss needs both classes present")
        return math.log(ybar / (1.0 - ybar))
    raise ValidationError(f"unknown loss {loss!r}")


def pseudo_residuals(loss: str, y, f) -> np.ndarray:
    """Negative gradient of the loss at the current fit."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    if y.shape != f.shape:
        raise ValidationError("outcome and fit lengths differ")
    if loss == "l2":
        return y - f
    if loss == "logistic":
        return y - sigmoid(f)
    raise ValidationError(f"unknown loss {loss!r}")


def risk(loss: str, y, f) -> np.ndarray:
    """Mean loss; `f` may be ``(n,)`` or ``(n, k)`` giving k risks."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 2:
        y = y[:, None]
    if loss == "l2":
        return np.mean((y - f) ** 2, axis=0)
    return np.mean(np.logaddexp(0.0, f) - y * f, axis=0)


class _LearnerBank:
    """Stacked learner matrices so one boosting step costs two mat-vecs."""

    def __init__(self, learners: list[LearnerSpec], X: np.ndarray):
        self.learners = learners
        self.X = X
        ind = [s for s in learners if s.columns.size == 1 and s.kind != "group"]
        grp = [s for s in learners if not (s.columns.size == 1 and s.kind != "group")]
        # order_index puts all single-column learners before group learners
        assert all(s.order_index < t.order_index for s in ind for t in grp)
        self.n_ind = len(ind)
        if ind:
            cols = np.array([int(s.columns[0]) for s in ind])
            d2 = np.array([s.svd.d[0] ** 2 for s in ind])
            lam = np.array([s.penalty for s in ind])
            self.ind_cols = cols
            self.Xind = np.ascontiguousarray(X[:, cols])
            self.ind_den = d2 + lam
            shrink = np.where(lam > 0, lam / (d2 + lam), 0.0)
            self.ind_w = (1.0 - shrink ** 2) / d2
        if grp:
            self.Ustack = np.ascontiguousarray(np.hstack([s.svd.U for s in grp]))
            w, starts, k = [], [], 0
            for s in grp:
                d2 = s.svd.d2
                sh = s.penalty / (d2 + s.penalty) if s.penalty > 0 else np.zeros_like(d2)
                w.append(1.0 - sh ** 2)
                starts.append(k)
                k += s.svd.r
            self.grp_w = np.concatenate(w)
            self.grp_starts = np.array(starts)
        self.grp = grp

    def reductions(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
        parts = []
        xu = pu = None
        if self.n_ind:
            xu = self.Xind.T @ u
            parts.append(self.ind_w * xu * xu)
        if self.grp:
            pu = self.Ustack.T @ u
            parts.append(np.add.reduceat(self.grp_w * pu * pu, self.grp_starts))
        return np.concatenate(parts), xu, pu

    def fit_learner(self, k: int, xu, pu) -> np.ndarray:
        """Ridge coefficients of learner `k` on its own columns."""
        if k < self.n_ind:
            return np.array([xu[k] / self.ind_den[k]])
        s = self.learners[k]
        i = k - self.n_ind
        start = self.grp_starts[i]
        proj = pu[start:start + s.svd.r]
        return s.svd.V @ (s.svd.d / (s.svd.d2 + s.penalty) * proj)


@dataclass
class FitResult:
    """Trajectory of a boosting run.

    ``beta_path[m]`` holds the coefficients after ``m`` iterations, so
    ``beta_path[0]`` is all zero.
    """

    offset: float
    selected: np.ndarray
    beta_path: np.ndarray
    train_loss: np.ndarray
    train_rss_of_selected: np.ndarray
    learners: list[LearnerSpec]
    config: BoostConfig
    names: tuple = ()
    group_of: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    fitted: np.ndarray | None = None

    @property
    def m_used(self) -> int:
        return len(self.selected)

    def beta_at(self, m: int | None = None) -> np.ndarray:
        if m is None:
            m = self.m_used
        if not 0 <= m <= self.m_used:
            raise ValidationError(f"m must lie in [0, {self.m_used}], got {m}")
        return self.beta_path[m]

    def increments(self):
        """Per-iteration sparse updates as ``(learner, columns, delta)``."""
        out = []
        for m, k in enumerate(self.selected, start=1):
            cols = self.learners[k].columns
            out.append((int(k), cols, self.beta_path[m, cols] - self.beta_path[m - 1, cols]))
        return out

    def ever_selected(self, m: int | None = None) -> np.ndarray:
        """Boolean mask of columns touched during the first `m` iterations."""
        if m is None:
            m = self.m_used
        mask = np.zeros(self.beta_path.shape[1], dtype=bool)
        for k in self.selected[:m]:
            mask[self.learners[k].columns] = True
        return mask


def boost_step(f, y, loss, bank: _LearnerBank, eta):
    """One gradient step.  Returns ``(winner, coef_delta, new_f, rss)``."""
    u = pseudo_residuals(loss, y, f)
    uu = float(u @ u)
    red, xu, pu = bank.reductions(u)
    rss = uu - red
    rmin = rss.min()
    k = int(np.flatnonzero(rss <= rmin + TIE_RTOL * max(uu, np.finfo(float).tiny))[0])
    coef = bank.fit_learner(k, xu, pu)
    cols = bank.learners[k].columns
    step = eta * coef
    new_f = f + bank.X[:, cols] @ step
    return k, step, new_f, float(rss[k])


def fit(gd: GroupedDesign, y, config: BoostConfig) -> FitResult:
    """Run `config.M` boosting iterations (no internal early stopping)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (gd.n,):
        raise ValidationError(f"outcome has length {y.size}, design has {gd.n} rows")
    if gd.n < 2:
        raise ValidationError("need at least 2 observations")
    if not np.all(np.isfinite(y)):
        raise ValidationError("outcome contains NaN or infinite values")
    learners = build_learners(gd, config)
    bank = _LearnerBank(learners, gd.X)
    offset = init_offset(config.loss, y)
    f = np.full(gd.n, offset)
    M = int(config.M)
    path = np.zeros((M + 1, gd.p))
    selected = np.empty(M, dtype=int)
    loss = np.empty(M)
    rss = np.empty(M)
    beta = np.zeros(gd.p)
    for m in range(M):
        k, step, f, rss[m] = boost_step(f, y, config.loss, bank, config.eta)
        beta[learners[k].columns] += step
        path[m + 1] = beta
        selected[m] = k
        loss[m] = risk(config.loss, y, f)
    return FitResult(offset, selected, path, loss, rss, learners, config,
                     gd.names, gd.group_of, f)


def predict(result: FitResult, Xnew, m: int | None = None, response_scale: bool = False):
    """``offset + Xnew @ beta_at(m)``; sigmoid applied for logistic on request."""
    Xnew = np.asarray(Xnew, dtype=float)
    if Xnew.ndim != 2 or Xnew.shape[1] != result.beta_path.shape[1]:
        raise ValidationError(
            f"Xnew must have {result.beta_path.shape[1]} columns, got shape {Xnew.shape}"
        )
    eta = result.offset + Xnew @ result.beta_at(m)
    if response_scale and result.config.loss == "logistic":
        return sigmoid(eta)
    return eta


def coefficient_paths(result: FitResult) -> list[tuple[int, str, int, float]]:
    """Dense ``(iteration, variable, group, value)`` rows for iterations 1..m_used."""
    names = result.names or tuple(f"x{j + 1}" for j in range(result.beta_path.shape[1]))
    rows = []
    for m in range(1, result.m_used + 1):
        for j, name in enumerate(names):
            rows.append((m, name, int(result.group_of[j]), float(result.beta_path[m, j])))
    return rows


def first_step_selection(gd: GroupedDesign, y, config: BoostConfig) -> dict:
    """Which learner wins the first boosting iteration."""
    res = fit(gd, y, config.replace(M=1))
    k = int(res.selected[0])
    spec = res.learners[k]
    return {"kind": spec.kind, "order_index": k, "group": spec.group,
            "columns": spec.columns.tolist()}


def check_learner_dfs(learners: list[LearnerSpec], tol: float = 1e-9) -> None:
    """Assert every df-targeted learner meets its target."""
    for s in learners:
        if s.df_target is not None:
            got = effective_df(s.svd.d, s.penalty)
            if abs(got - s.df_target) > tol:
                raise AssertionError(f"learner {s.order_index}: df {got} != {s.df_target}")
