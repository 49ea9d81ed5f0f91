"""Simulation scenarios with full, half and empty effect groups."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._errors import SGBError, ValidationError
from .boosting import BoostConfig, fit
from .design import GroupedDesign, design_from_groups
from .evaluation import kfold_cv, metric_report

SNR = 4.0
HALF_EFFECTS = 5
EFFECT_SIZE = 1.0

RESULT_COLUMNS = ("scenario", "rep", "model", "alpha", "lambda_base", "best_m", "rmse",
                  "correct_effects", "correct_zeros", "correct_classified", "error")


@dataclass(frozen=True)
class Scenario:
    id: int
    full_groups: int
    half_groups: int
    empty_groups: int
    full_vars: int
    half_vars: int
    empty_vars: int
    cor: float
    n: int

    def __post_init__(self):
        counts = (self.full_groups, self.half_groups, self.empty_groups,
                  self.full_vars, self.half_vars, self.empty_vars)
        if min(counts) < 0:
            raise ValidationError("scenario counts must be non-negative")
        if self.full_groups + self.half_groups + self.empty_groups < 1:
            raise ValidationError("scenario needs at least one group")
        if self.n < 2 or not 0 <= self.cor < 1:
            raise ValidationError("scenario needs n >= 2 and 0 <= cor < 1")

    @property
    def group_sizes(self) -> list[int]:
        return ([self.full_vars] * self.full_groups + [self.half_vars] * self.half_groups
                + [self.empty_vars] * self.empty_groups)

    @property
    def p(self) -> int:
        return sum(self.group_sizes)

    @property
    def G(self) -> int:
        return len(self.group_sizes)


_TABLE = [
    (1, 5, 5, 5, 15, 15, 15, 0.0, 50),
    (2, 5, 5, 5, 5, 5, 15, 0.0, 50),
    (3, 5, 5, 5, 5, 15, 5, 0.0, 50),
    (4, 5, 5, 5, 15, 5, 5, 0.0, 50),
    (5, 2, 2, 5, 15, 15, 15, 0.0, 50),
    (6, 5, 2, 2, 15, 15, 15, 0.0, 50),
    (7, 2, 5, 2, 15, 15, 15, 0.0, 50),
    (8, 0, 0, 5, 0, 0, 15, 0.0, 50),
    (9, 5, 0, 0, 15, 0, 0, 0.0, 50),
    (10, 5, 5, 5, 15, 15, 15, 0.0, 500),
    (11, 5, 5, 5, 15, 15, 15, 0.5, 50),
    (12, 5, 5, 5, 15, 15, 15, 0.95, 50),
]


def builtin_scenarios() -> list[Scenario]:
    return [Scenario(*row) for row in _TABLE]


def get_scenario(sid: int) -> Scenario:
    for s in builtin_scenarios():
        if s.id == sid:
            return s
    raise ValidationError(f"unknown scenario id {sid}; expected 1..12")


@dataclass(frozen=True)
class SimData:
    gd: GroupedDesign
    beta_true: np.ndarray
    y: np.ndarray
    sigma: float
    seed: int


def scenario_beta(s: Scenario) -> np.ndarray:
    parts = []
    parts += [np.full(s.full_vars, EFFECT_SIZE)] * s.full_groups
    half = np.zeros(s.half_vars)
    half[:min(HALF_EFFECTS, s.half_vars)] = EFFECT_SIZE
    parts += [half] * s.half_groups
    parts += [np.zeros(s.empty_vars)] * s.empty_groups
    return np.concatenate(parts) if parts else np.zeros(0)


def generate(s: Scenario, seed: int) -> SimData:
    """Draw one dataset.

    Columns are standard normal with constant pairwise correlation
    ``s.cor`` (one common factor).  ``sigma`` makes the sample standard
    deviation of ``X @ beta`` exactly ``SNR`` times ``sigma``.  Without
    effects the outcome is standard normal noise.
    """
    rng = np.random.default_rng(seed)
    p = s.p
    common = rng.standard_normal((s.n, 1))
    own = rng.standard_normal((s.n, p))
    X = math.sqrt(s.cor) * common + math.sqrt(1 - s.cor) * own
    beta = scenario_beta(s)
    eps = rng.standard_normal(s.n)
    signal = X @ beta
    if np.any(beta != 0):
        sigma = float(np.std(signal, ddof=1) / SNR)
    else:
        sigma = 1.0
    y = signal + sigma * eps
    groups, start = [], 0
    for size in s.group_sizes:
        groups.append(range(start, start + size))
        start += size
    return SimData(design_from_groups(X, groups), beta, y, sigma, seed)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    variant: str
    uses_alpha: bool
    lambda_base: float | None = None


def default_models(lambda_bases=(100.0,)) -> dict[str, list[ModelSpec]]:
    return {
        "sgb-df": [ModelSpec("sgb-df", "sgb-df", True)],
        "sgb-lambda": [ModelSpec("sgb-lambda", "sgb-lambda", True, float(lb)) for lb in lambda_bases],
        "componentwise": [ModelSpec("componentwise", "componentwise", False)],
        "groupwise": [ModelSpec("groupwise", "groupwise", False)],
    }


def _cells(scenarios, models, alphas, reps):
    cells = []
    for s in scenarios:
        for r in range(reps):
            for m in models:
                for a in (alphas if m.uses_alpha else [None]):
                    cells.append((s, r, m, a))
    return cells


def _run_cell(cell, seed, eta, M, k):
    s, r, model, a = cell
    row = {"scenario": s.id, "rep": r, "model": model.name, "alpha": a,
           "lambda_base": model.lambda_base, "best_m": None, "rmse": None,
           "correct_effects": None, "correct_zeros": None, "correct_classified": None,
           "error": ""}
    try:
        data = generate(s, seed + r)
        cfg = BoostConfig(variant=model.variant, alpha=0.5 if a is None else a,
                          lambda_base=model.lambda_base, eta=eta, M=M)
        cv = kfold_cv(data.gd, data.y, cfg, k=k, seed=seed + r)
        res = fit(data.gd, data.y, cfg.replace(M=cv.best_m))
        rep = metric_report(data.beta_true, res.beta_at(cv.best_m),
                            selected=res.ever_selected(cv.best_m))
        row.update(best_m=cv.best_m, rmse=rep.rmse, correct_effects=rep.correct_effects,
                   correct_zeros=rep.correct_zeros, correct_classified=rep.correct_classified)
    except (SGBError, ArithmeticError, np.linalg.LinAlgError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_experiment(scenarios, models, alphas, reps: int = 5, seed: int = 0, *,
                   eta: float = 0.1, M: int = 600, k: int = 3, threads: int = 1) -> list[dict]:
    """Generate, cross-validate, refit at the chosen stop and score every cell.

    Replication ``r`` uses data seed ``seed + r`` (shared by all models so
    they see the same datasets).  Rows come back in canonical
    (scenario, rep, model, alpha) order whatever the thread count.
    """
    scenarios, models = list(scenarios), list(models)
    if not scenarios or not models or reps < 1:
        raise ValidationError("need at least one scenario, one model and one replication")
    if any(m.uses_alpha for m in models) and not alphas:
        raise ValidationError("alpha grid is empty")
    cells = _cells(scenarios, models, list(alphas), reps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda c: _run_cell(c, seed, eta, M, k), cells))
    return [_run_cell(c, seed, eta, M, k) for c in cells]


def summarize(rows, key=("scenario", "model", "alpha"), metric="rmse") -> dict:
    """Mean of `metric` per key over replications, skipping error rows."""
    acc: dict = {}
    for r in rows:
        if r["error"] or r[metric] is None:
            continue
        acc.setdefault(tuple(r[k] for k in key), []).append(r[metric])
    return {k: float(np.mean(v)) for k, v in acc.items()}
