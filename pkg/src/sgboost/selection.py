"""Closed-form selection results for one boosting iteration of ridge learners.

Sufficient conditions deciding whether a group learner or one of its own
individual column learners attains the lower residual sum of squares, the
Gamma law of the ridge-vs-least-squares RSS gap under an orthonormal
design, and beta-prime selection probabilities for scaled orthogonal
designs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._errors import ValidationError
from .design import thin_svd
from .ridge import effective_df
from .special import reg_incomplete_beta

INDIVIDUAL = "individual_wins"
GROUP = "group_wins"
TIE = "tie"
UNDETERMINED = "undetermined"


@dataclass
class BoundsReport:
    """Evaluated selection-bound conditions for one group matrix.

    ``d_plus``/``d_minus`` are the extreme squared nonzero singular values
    of the group matrix and ``dbar2`` the squared column norms.  The
    ``cond_*`` arrays hold one boolean per column.
    """

    d_plus: float
    d_minus: float
    dbar2: np.ndarray
    r: int
    k: int
    df_mu: float
    df_lambdas: np.ndarray
    cond_indiv_spectral: np.ndarray
    cond_indiv_df: np.ndarray
    cond_group_df: np.ndarray
    cond_group_spectral: np.ndarray
    implied: str = field(default=UNDETERMINED)

    @property
    def dbar_plus(self) -> float:
        return float(self.dbar2.max())

    @property
    def dbar_minus(self) -> float:
        return float(self.dbar2.min())

    @property
    def individual_wins(self) -> bool:
        return bool(self.cond_indiv_spectral.all() or self.cond_indiv_df.all())

    @property
    def group_wins(self) -> bool:
        return bool(self.cond_group_df.all() or self.cond_group_spectral.all())

    def failed(self) -> list[str]:
        """Names of the sub-conditions that do not hold for every column."""
        names = ("indiv_spectral", "indiv_df", "group_df", "group_spectral")
        return [n for n in names if not getattr(self, "cond_" + n).all()]

    def as_pairs(self, names=None) -> list[tuple[str, object]]:
        names = names or [f"x{j + 1}" for j in range(self.k)]
        out = [
            ("d_plus", self.d_plus), ("d_minus", self.d_minus),
            ("dbar_plus", self.dbar_plus), ("dbar_minus", self.dbar_minus),
            ("rank", self.r), ("columns", self.k), ("df_mu", self.df_mu),
        ]
        for j, nm in enumerate(names):
            out += [
                (f"dbar2[{nm}]", float(self.dbar2[j])),
                (f"df_lambda[{nm}]", float(self.df_lambdas[j])),
                (f"indiv_spectral[{nm}]", bool(self.cond_indiv_spectral[j])),
                (f"indiv_df[{nm}]", bool(self.cond_indiv_df[j])),
                (f"group_df[{nm}]", bool(self.cond_group_df[j])),
                (f"group_spectral[{nm}]", bool(self.cond_group_spectral[j])),
            ]
        out += [("failed", ",".join(self.failed()) or "none"), ("general_verdict", self.implied)]
        return out


def _verdict(indiv: bool, group: bool) -> str:
    if indiv and group:
        return TIE
    if indiv:
        return INDIVIDUAL
    if group:
        return GROUP
    return UNDETERMINED


def selection_bounds(group_matrix, lambdas, mu: float) -> BoundsReport:
    """Sufficient conditions for individual-only or group-only selection.

    Parameters
    ----------
    group_matrix : ndarray of shape (n, k)
    lambdas : float or array_like of shape (k,)
        Ridge penalty of each column's individual learner.
    mu : float
        Ridge penalty of the group learner.

    Notes
    -----
    With ``c_l = (dbar_l^2 + 2 lam_l) / (dbar_l^2 + lam_l)^2`` (equal to
    ``df(lam_l) / dbar_l^2``) and ``g(s) = (s + 2 mu) / (s + mu)^2``, an
    individual learner is guaranteed to win when, for every column,
    ``g(d_minus) <= c_l / k`` or ``df(mu) <= df(lam_l) d_minus / (k dbar_plus)``;
    the group learner is guaranteed to win when ``g(d_plus) >= c_l`` for
    every column.  ``k`` is the column count, which bounds the largest
    squared column projection from below; it equals the rank for
    full-rank groups.
    """
    M = np.asarray(group_matrix, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    k = M.shape[1]
    lam = np.broadcast_to(np.asarray(lambdas, dtype=float), (k,)).copy()
    if np.any(lam < 0) or mu < 0:
        raise ValidationError("penalties must be non-negative")
    svd = thin_svd(M)
    d2 = svd.d2
    d_plus, d_minus = float(d2.max()), float(d2.min())
    dbar2 = np.einsum("ij,ij->j", M, M)
    if np.any(dbar2 == 0):
        raise ValidationError("group matrix has an all-zero column")
    df_mu = effective_df(svd.d, mu)
    df_lam = np.array([effective_df([np.sqrt(s)], l) for s, l in zip(dbar2, lam)])
    c = (dbar2 + 2 * lam) / (dbar2 + lam) ** 2

    def g(s):
        return (s + 2 * mu) / (s + mu) ** 2

    indiv_spec = g(d_minus) <= c / k
    indiv_df = df_mu <= df_lam * d_minus / (k * dbar2.max())
    group_df = g(d_plus) >= df_lam / dbar2
    group_spec = g(d_plus) >= c
    rep = BoundsReport(d_plus, d_minus, dbar2, svd.r, k, df_mu, df_lam,
                       indiv_spec, indiv_df, group_df, group_spec)
    rep.implied = _verdict(rep.individual_wins, rep.group_wins)
    return rep


def bounds_orthogonal(alpha: float, p: int, case: str) -> str:
    """Selection verdict for sgb-df penalties on an orthogonal group.

    ``case="V_identity"``: the group is ``U D`` (orthogonal columns of any
    norms); ``alpha >= 0.5`` forces individual selection.
    ``case="single_singular_value"``: the group is ``d U V'`` (all singular
    values equal); ``alpha >= 0.5`` forces individual selection and
    ``1 - alpha >= p * alpha`` forces group selection.  Both at once means
    the two RSS values coincide.
    """
    if p < 1 or int(p) != p:
        raise ValidationError("group size must be a positive integer")
    if not 0 <= alpha <= 1:
        raise ValidationError("alpha must lie in [0, 1]")
    indiv = (1 - alpha) <= alpha
    if case == "V_identity":
        return INDIVIDUAL if indiv else UNDETERMINED
    if case == "single_singular_value":
        group = (1 - alpha) >= p * alpha
        return _verdict(indiv, group)
    raise ValidationError(f"unknown case {case!r}")


def alpha_zone(p: int) -> tuple[float, float]:
    """Interval of alpha in which a scaled orthogonal group of size `p` can
    lose to or beat its own columns depending on the data."""
    return 1.0 / (p + 1.0), 0.5


def recommended_alpha_range(p_max: int) -> tuple[float, float]:
    """Practical alpha range for tuning without computing singular values."""
    return 1.0 / (p_max + 1.0), 0.6


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float
    df: float

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def var(self) -> float:
        return self.shape * self.scale ** 2

    def cdf(self, x):
        from scipy.stats import gamma
        return gamma.cdf(x, a=self.shape, scale=self.scale)


def delta_rss_gamma(p: int, lam: float) -> GammaParams:
    """Gamma law of ``(RSS_ridge - RSS_ls) / sigma^2`` for ``X'X = I_p``."""
    if not lam > 0:
        raise ValidationError("penalty must be positive")
    if p < 1:
        raise ValidationError("p must be positive")
    t = 1.0 / (1.0 + lam)
    df = p * (2 * t - t * t)
    return GammaParams(shape=p / 2.0, scale=2.0 * (1.0 - df / p), df=df)


@dataclass(frozen=True)
class SelectionProbability:
    """Probability that the group learner has the lower (or equal) RSS.

    ``value = I_{1/(1+q)}(a, b)``: the distribution function of a
    ``q``-scaled beta-prime(a, b) variable evaluated at 1.
    """

    value: float
    a: float
    b: float
    q: float
    regime: str
    degenerate: bool = False


def prob_group_vs_subcolumns(p: int, p1: int, df_lambda: float, df_mu: float) -> SelectionProbability:
    """Group-selection probability against a learner on ``p1`` of its columns.

    Valid for a scaled orthogonal group and pure-noise outcome, provided
    ``df_lambda / p1 >= df_mu / p``.
    """
    if not 0 < p1 < p:
        raise ValidationError("need 0 < p1 < p")
    if not (df_lambda > 0 and df_mu > 0):
        raise ValidationError("degrees of freedom must be positive")
    lhs, rhs = df_lambda / p1, df_mu / p
    if lhs < rhs * (1 - 1e-12):
        raise ValidationError("theorem precondition fails: df_lambda/p1 < df_mu/p")
    q = max(df_lambda * p / (df_mu * p1) - 1.0, 0.0)
    a, b = p1 / 2.0, (p - p1) / 2.0
    if q == 0.0:
        return SelectionProbability(1.0, a, b, q, "subgroup", degenerate=True)
    return SelectionProbability(reg_incomplete_beta(a, b, 1.0 / (1.0 + q)), a, b, q, "subgroup")


def prob_group_vs_external(p: int, df_lambda: float, df_mu: float) -> SelectionProbability:
    """Group-selection probability against one column orthogonal to the group.

    The individual learner's RSS gain is ``df_lambda * chi2(1)`` and the
    group's is ``(df_mu / p) * chi2(p)``, independent of each other, so the
    group wins with probability ``I_{1/(1+q)}(1/2, p/2)``,
    ``q = df_lambda * p / df_mu``.
    """
    if p < 2 or int(p) != p:
        raise ValidationError("p must be an integer >= 2")
    if not 0 < df_lambda <= 1:
        raise ValidationError("df_lambda must lie in (0, 1]")
    if not 0 < df_mu < p:
        raise ValidationError("df_mu must lie in (0, p)")
    q = df_lambda * p / df_mu
    a, b = 0.5, p / 2.0
    return SelectionProbability(reg_incomplete_beta(a, b, 1.0 / (1.0 + q)), a, b, q, "external")


def orthogonal_case(group_matrix, rtol: float = 1e-10) -> str | None:
    """Classify a group with mutually orthogonal columns.

    Returns ``"single_singular_value"`` when all column norms are equal,
    ``"V_identity"`` for orthogonal columns of differing norms and None
    otherwise (including single-column groups).
    """
    M = np.asarray(group_matrix, dtype=float)
    if M.ndim != 2 or M.shape[1] < 2:
        return None
    G = M.T @ M
    diag = np.diag(G).copy()
    off = G - np.diag(diag)
    if np.any(diag <= 0) or np.abs(off).max() > rtol * diag.max():
        return None
    if diag.max() - diag.min() <= rtol * diag.max():
        return "single_singular_value"
    return "V_identity"
