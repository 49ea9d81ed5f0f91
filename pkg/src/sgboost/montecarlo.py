"""Monte-Carlo oracles for the closed-form selection results.

Simulations are split into fixed-size chunks; chunk ``i`` draws from
``default_rng(seed + i)``.  The chunking never depends on the number of
worker threads, so results are identical for any `threads`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._errors import ValidationError
from .design import thin_svd
from .ridge import lambda_for_df, lambda_for_df_single, rss_one_step

CHUNK = 10_000


@dataclass(frozen=True)
class McFrequency:
    frequency: float
    se: float
    nsims: int
    hits: int


def _chunks(nsims: int, chunk: int = CHUNK):
    return [min(chunk, nsims - s) for s in range(0, nsims, chunk)]


def _run_chunks(fn, nsims, seed, threads):
    sizes = _chunks(nsims)
    jobs = [(size, seed + i) for i, size in enumerate(sizes)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda j: fn(*j), jobs))
    return [fn(*j) for j in jobs]


def orthonormal_basis(n: int, k: int, rng) -> np.ndarray:
    """``n x k`` matrix with orthonormal columns from a seeded Gaussian draw."""
    if k > n:
        raise ValidationError("need n >= k for an orthonormal basis")
    Q, R = np.linalg.qr(rng.standard_normal((n, k)))
    return Q * np.sign(np.diag(R))


def _lambda(d, target):
    d = np.atleast_1d(d)
    return lambda_for_df_single(d[0], target) if d.size == 1 else lambda_for_df(d, target)


def _freq(hits, nsims):
    f = hits / nsims
    return McFrequency(f, float(np.sqrt(f * (1 - f) / nsims)), nsims, int(hits))


def mc_selection_frequency(p: int, df_lambda: float, df_mu: float, *, p1: int | None = None,
                           external: bool = False, nsims: int = 100_000, seed: int = 0,
                           scale: float = 1.0, threads: int = 1) -> McFrequency:
    """Frequency with which a group learner beats a single competing learner.

    The group is ``scale * U`` with ``U`` orthonormal (``p`` columns).  The
    competitor is either the sub-matrix of its first `p1` columns or, with
    ``external=True``, one extra column orthogonal to the whole group.
    Outcomes are pure noise ``y ~ N(0, I_n)``.  Counts ``RSS_individual >=
    RSS_group``.
    """
    if nsims < 1:
        raise ValidationError("nsims must be >= 1")
    if external == (p1 is not None):
        raise ValidationError("give exactly one of p1 or external=True")
    rng = np.random.default_rng(seed)
    n = p + 3
    Q = orthonormal_basis(n, p + 1, rng)
    group = scale * Q[:, :p]
    other = scale * Q[:, [p]] if external else group[:, :p1]
    g_svd, o_svd = thin_svd(group), thin_svd(other)
    mu = _lambda(g_svd.d, df_mu)
    lam = _lambda(o_svd.d, df_lambda)

    def work(size, s):
        Y = np.random.default_rng(s).standard_normal((n, size))
        return int(np.sum(rss_one_step(o_svd, Y, lam) >= rss_one_step(g_svd, Y, mu)))

    hits = sum(_run_chunks(work, nsims, seed + 1, threads))
    return _freq(hits, nsims)


def _structured_group(structure: str, n: int, p: int, rho: float, rng) -> np.ndarray:
    if structure == "orthogonal":
        return orthonormal_basis(n, p, rng) * np.sqrt(n)
    if structure == "independent":
        return rng.standard_normal((n, p))
    if structure == "correlated":
        z = rng.standard_normal((n, 1))
        return np.sqrt(rho) * z + np.sqrt(1 - rho) * rng.standard_normal((n, p))
    raise ValidationError(f"unknown structure {structure!r}")


def mc_first_step_group_frequency(alpha: float, p: int = 2, *, structure: str = "orthogonal",
                                  rho: float = 0.5, n: int = 50, nsims: int = 10_000,
                                  seed: int = 0, threads: int = 1) -> McFrequency:
    """First-iteration group-selection frequency under sgb-df penalties.

    The group learner (df ``1 - alpha``) competes against all `p` of its
    own individual learners (df ``alpha`` each).  The design is drawn once
    from `seed`; every simulation draws a fresh noise outcome.
    """
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    X = _structured_group(structure, n, p, rho, rng)
    g_svd = thin_svd(X)
    mu = _lambda(g_svd.d, 1 - alpha)
    cols = [thin_svd(X[:, [j]]) for j in range(p)]
    lams = [lambda_for_df_single(c.d[0], alpha) for c in cols]

    def work(size, s):
        Y = np.random.default_rng(s).standard_normal((n, size))
        ind = np.min([rss_one_step(c, Y, l) for c, l in zip(cols, lams)], axis=0)
        return int(np.sum(rss_one_step(g_svd, Y, mu) <= ind))

    hits = sum(_run_chunks(work, nsims, seed + 1, threads))
    return _freq(hits, nsims)


def mc_delta_rss(p: int, lam: float, nsims: int = 100_000, seed: int = 0, *,
                 bins: int = 50, threads: int = 1) -> dict:
    """Sampled ``RSS(ridge) - RSS(least squares)`` for an orthonormal design.

    Both residual sums are computed directly from residual vectors, not from
    the closed form being checked.
    """
    if not lam > 0:
        raise ValidationError("penalty must be positive")
    rng = np.random.default_rng(seed)
    n = p + 5
    X = orthonormal_basis(n, p, rng)
    ridge_coef = np.linalg.solve(X.T @ X + lam * np.eye(p), X.T)
    ls_coef = np.linalg.lstsq(X, np.eye(n), rcond=None)[0]

    def work(size, s):
        Y = np.random.default_rng(s).standard_normal((n, size))
        r_ridge = Y - X @ (ridge_coef @ Y)
        r_ls = Y - X @ (ls_coef @ Y)
        return np.sum(r_ridge ** 2, axis=0) - np.sum(r_ls ** 2, axis=0)

    draws = np.concatenate(_run_chunks(work, nsims, seed + 1, threads))
    hist, edges = np.histogram(draws, bins=bins)
    return {"mean": float(draws.mean()), "var": float(draws.var(ddof=1)),
            "histogram": (hist, edges), "draws": draws}


def mc_rss_gap(X1, lam1, X2, lam2, nsims: int = 100_000, seed: int = 0,
               threads: int = 1) -> tuple[float, float]:
    """Mean and standard error of ``RSS_1 - RSS_2`` over noise outcomes."""
    X1, X2 = np.asarray(X1, float), np.asarray(X2, float)
    n = X1.shape[0]
    s1, s2 = thin_svd(X1), thin_svd(X2)

    def work(size, s):
        Y = np.random.default_rng(s).standard_normal((n, size))
        return rss_one_step(s1, Y, lam1) - rss_one_step(s2, Y, lam2)

    diff = np.concatenate(_run_chunks(work, nsims, seed, threads))
    return float(diff.mean()), float(diff.std(ddof=1) / np.sqrt(nsims))


def rss_order_violations(group_matrix, lambdas, mu, verdict: str, nsims: int = 1000,
                         seed: int = 0, slack: float = 1e-9) -> int:
    """Count outcomes contradicting a decisive selection verdict.

    For ``individual_wins`` a violation is ``min_l RSS(lam_l) > RSS(mu)``;
    for ``group_wins`` it is ``RSS(mu) > min_l RSS(lam_l)``.  Slack is
    relative to ``y'y``.
    """
    M = np.asarray(group_matrix, dtype=float)
    n, k = M.shape
    lam = np.broadcast_to(np.asarray(lambdas, float), (k,))
    Y = np.random.default_rng(seed).standard_normal((n, nsims))
    yy = np.einsum("ij,ij->j", Y, Y)
    grp = rss_one_step(M, Y, mu)
    ind = np.min([rss_one_step(M[:, [j]], Y, lam[j]) for j in range(k)], axis=0)
    tol = slack * yy
    if verdict == "individual_wins":
        return int(np.sum(ind > grp + tol))
    if verdict == "group_wins":
        return int(np.sum(grp > ind + tol))
    raise ValidationError(f"not a decisive verdict: {verdict!r}")
