"""Stratified T-fold cross-validation over a (theta, alpha) grid.

For every fold and every theta, class quantiles are estimated on the
training part only (no leakage), the held-out part is transformed with
that table, and the inner loop over alpha fits and scores the
metalearner. The (theta, alpha) cell with the lowest mean
misclassification wins and the model is refit on the full data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binary import (
    FittedEqc,
    compute_scaling,
    fit_binary_eqc,
    transform_dataset,
)
from .data import Dataset
from .errors import DomainError, TuningError
from .metalearners import (
    PenaltySpec,
    SolverConfig,
    fit_linear_svm,
    fit_penalized_logistic,
    _fit_logistic_newton,
)
from .multiclass import build_design, fit_multiclass_eqc, fit_on_design
from .quantiles import (
    QuantileParams,
    degenerate_columns,
    estimate_quantile_table,
)

LEARNERS = ("ridge", "lasso", "hinge", "logistic", "unit-weights", "multiclass-ridge")
_ALPHA_FREE = ("logistic", "unit-weights")

DEFAULT_THETA_GRID = tuple(np.round(np.arange(0.05, 0.951, 0.05), 2))
DEFAULT_ALPHA_GRID = tuple(np.logspace(-4, 2, 15))


@dataclass(frozen=True)
class TuningGrid:
    """Finite search grid plus the fold layout.

    theta_grid holds common-theta values (one level shared by all
    variables); alpha_grid holds penalty values (lambda or cost,
    depending on the learner) and is ignored by learners without a
    penalty. Defaults: 19 thetas 0.05..0.95, 15 log-spaced alphas
    1e-4..1e2, 5 stratified folds.
    """

    theta_grid: tuple = DEFAULT_THETA_GRID
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    folds: int = 5
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        th = np.asarray(self.theta_grid, dtype=float)
        al = np.asarray(self.alpha_grid, dtype=float)
        if th.size == 0 or al.size == 0:
            raise DomainError("grids must be non-empty")
        if np.any(th <= 0) or np.any(th >= 1):
            raise DomainError("every theta must lie strictly in (0, 1)")
        if np.any(al <= 0) or not np.all(np.isfinite(al)):
            raise DomainError("every alpha must be positive and finite")
        if self.folds < 2:
            raise DomainError("need at least 2 folds")
        object.__setattr__(self, "theta_grid", tuple(float(t) for t in th))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in al))


@dataclass
class CvResult:
    """Grid of mean misclassification rates and the chosen cell.

    per_fold has shape (folds, |theta_grid|, |alpha_grid|) with NaN for
    skipped folds; table is the fold mean. Learners without an alpha get
    a single NaN alpha column.
    """

    thetas: np.ndarray
    alphas: np.ndarray
    table: np.ndarray
    per_fold: np.ndarray
    chosen: tuple[float, float]
    warnings: list[str] = field(default_factory=list)

    def to_csv_rows(self) -> list[str]:
        """Long-format rows 'theta,alpha,fold,error' (header included)."""
        rows = ["theta,alpha,fold,error"]
        T = self.per_fold.shape[0]
        for t in range(T):
            for h, th in enumerate(self.thetas):
                for a, al in enumerate(self.alphas):
                    err = self.per_fold[t, h, a]
                    if np.isnan(err):
                        continue
                    rows.append(f"{th!r},{al!r},{t},{err!r}")
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.to_csv_rows()) + "\n")


def make_folds(labels, T: int, stratified: bool = True, seed: int = 0) -> np.ndarray:
    """Fold index (0..T-1) per observation; deterministic for a seed.

    Stratified mode deals each class's shuffled members around the folds,
    continuing the dealing position across classes, which keeps class
    proportions per fold within one member.
    """
    y = np.asarray(labels)
    n = y.size
    if T < 2:
        raise DomainError("need at least 2 folds")
    if T > n:
        raise DomainError(f"cannot make {T} folds from {n} observations")
    rng = np.random.Generator(np.random.PCG64(seed))
    fold = np.empty(n, dtype=int)
    if not stratified:
        perm = rng.permutation(n)
        fold[perm] = np.arange(n) % T
        return fold
    offset = 0
    for k in np.unique(y):
        idx = np.flatnonzero(y == k)
        perm = rng.permutation(idx.size)
        fold[idx[perm]] = (offset + np.arange(idx.size)) % T
        offset = (offset + idx.size) % T
    return fold


def misclassification_rate(predictions, truth) -> float:
    pred = np.asarray(predictions)
    tru = np.asarray(truth)
    if pred.shape != tru.shape:
        raise DomainError("prediction and truth lengths differ")
    if pred.size == 0:
        raise DomainError("cannot score empty predictions")
    return float(np.mean(pred != tru))


def _binary_fold_errors(
    tr: Dataset, te: Dataset, thetas, alphas, learner, config, scaling, fold_id, trace
) -> np.ndarray:
    """Errors (H, A) for one fold; quantiles come from tr only."""
    ids = tr.class_ids
    errs = np.full((len(thetas), len(alphas)), np.nan)
    scaler = compute_scaling(tr.X, scaling) if scaling is not None else None
    tr_scaled = Dataset(scaler.apply(tr.X), tr.y) if scaler is not None else tr
    y12 = np.where(tr.y == ids[0], 1, 2)
    for h, th in enumerate(thetas):
        theta = QuantileParams.common(th, tr.p)
        table = estimate_quantile_table(tr_scaled, theta)
        Z_tr = transform_dataset(tr, table, scaler)
        Z_te = transform_dataset(te, table, scaler)
        if learner == "unit-weights":
            s = Z_te @ np.ones(Z_te.shape[1])
            pred = np.where(s <= 0, ids[0], ids[1])
            errs[h, 0] = misclassification_rate(pred, te.y)
            if trace is not None:
                trace.append((fold_id, th, np.nan, 0.0, np.ones(tr.p)))
            continue
        keep = ~degenerate_columns(Z_tr)
        Zs, Zv = Z_tr[:, keep], Z_te[:, keep]
        if learner == "logistic":
            coef, _ = _fit_logistic_newton(Zs, (y12 - 1).astype(float), 0.0, config)
            s = coef.decision_values(Zv)
            pred = np.where(s <= 0, ids[0], ids[1])
            errs[h, 0] = misclassification_rate(pred, te.y)
            if trace is not None:
                trace.append((fold_id, th, np.nan, coef.intercept, coef.weights))
            continue
        # strongest regularization first: it is the easiest solve and the
        # natural warm-start entry (large lambda, or small cost)
        order = (
            np.argsort(alphas)[::-1] if learner in ("ridge", "lasso") else np.argsort(alphas)
        )
        warm = None
        for a in order:
            pen = PenaltySpec(learner, alphas[a]) if learner != "hinge" else None
            if learner == "hinge":
                coef, _ = fit_linear_svm(Zs, y12, alphas[a], config)
            else:
                coef, _ = fit_penalized_logistic(Zs, y12, pen, config, warm_start=warm)
                warm = coef
            s = coef.decision_values(Zv)
            pred = np.where(s <= 0, ids[0], ids[1])
            errs[h, a] = misclassification_rate(pred, te.y)
            if trace is not None:
                trace.append((fold_id, th, alphas[a], coef.intercept, coef.weights))
    return errs


def _multiclass_fold_errors(
    tr: Dataset, te: Dataset, thetas, alphas, config, scaling, fold_id, trace
) -> np.ndarray:
    errs = np.full((len(thetas), len(alphas)), np.nan)
    scaler = compute_scaling(tr.X, scaling) if scaling is not None else None
    tr_scaled = Dataset(scaler.apply(tr.X), tr.y) if scaler is not None else tr
    for h, th in enumerate(thetas):
        theta = QuantileParams.common(th, tr.p)
        table = estimate_quantile_table(tr_scaled, theta)
        design = build_design(tr, table, scaler)
        te_design = build_design(te, table, scaler)
        for a in np.argsort(alphas)[::-1]:
            coef, _ = fit_on_design(design, alphas[a], config)
            logits = te_design.blocks @ coef.weights
            logits[:, : coef.intercepts.size] -= coef.intercepts
            pred = table.class_ids[np.argmax(logits, axis=1)]
            errs[h, a] = misclassification_rate(pred, te.y)
            if trace is not None:
                trace.append((fold_id, th, alphas[a], coef.intercepts.copy(), coef.weights))
    return errs


def _choose_cell(table: np.ndarray, thetas, alphas, learner: str) -> tuple[int, int]:
    """Minimum mean error; ties prefer stronger regularization (larger
    lambda for ridge/lasso, smaller cost for hinge), then theta nearest
    0.5, then grid order."""
    best = None
    for h, th in enumerate(thetas):
        for a, al in enumerate(alphas):
            err = table[h, a]
            if np.isnan(err):
                continue
            if not np.isfinite(al):
                alpha_key = 0.0
            elif learner == "hinge":
                alpha_key = al
            else:
                alpha_key = -al
            key = (err, alpha_key, abs(th - 0.5), h, a)
            if best is None or key < best[0]:
                best = (key, h, a)
    if best is None:
        raise TuningError("all cross-validation cells are empty")
    return best[1], best[2]


def tune_and_train(
    train: Dataset,
    grid: TuningGrid,
    learner: str,
    config: SolverConfig = SolverConfig(),
    scaling: str | None = None,
    trace: list | None = None,
):
    """Grid-tune (theta, alpha) by CV misclassification and refit on all data.

    learner is one of 'ridge', 'lasso', 'hinge', 'logistic',
    'unit-weights' (pure QC tuning), 'multiclass-ridge'. Folds missing a
    class in their training part are skipped with a recorded warning; if
    every fold is skipped a TuningError is raised. Returns
    (FittedEqc-or-FittedMulticlassEqc, CvResult).

    The hinge alpha is a cost (larger = weaker regularization); ridge and
    lasso alphas are penalties (larger = stronger). Ties at the minimum
    prefer the stronger regularization in both conventions.
    """
    if learner not in LEARNERS:
        raise DomainError(f"unknown learner {learner!r}")
    multiclass = learner == "multiclass-ridge"
    ids = train.class_ids
    if not multiclass and ids.size != 2:
        raise DomainError("binary learners require exactly 2 classes")
    thetas = list(grid.theta_grid)
    alphas = [np.nan] if learner in _ALPHA_FREE else list(grid.alpha_grid)
    folds = make_folds(train.y, grid.folds, grid.stratified, grid.seed)
    per_fold = np.full((grid.folds, len(thetas), len(alphas)), np.nan)
    warnings: list[str] = []
    all_ids = set(int(k) for k in ids)
    for t in range(grid.folds):
        tr = train.subset(folds != t)
        te = train.subset(folds == t)
        if te.n == 0:
            warnings.append(f"fold {t} empty; skipped")
            continue
        if set(int(k) for k in tr.class_ids) != all_ids:
            warnings.append(f"fold {t} training part misses a class; skipped")
            continue
        if multiclass:
            per_fold[t] = _multiclass_fold_errors(
                tr, te, thetas, alphas, config, scaling, t, trace
            )
        else:
            per_fold[t] = _binary_fold_errors(
                tr, te, thetas, alphas, learner, config, scaling, t, trace
            )
    if np.all(np.isnan(per_fold)):
        raise TuningError("no fold produced a usable score")
    with np.errstate(invalid="ignore"):
        table = np.nanmean(per_fold, axis=0)
    h, a = _choose_cell(table, thetas, alphas, learner)
    theta_hat, alpha_hat = thetas[h], alphas[a]

    theta = QuantileParams.common(theta_hat, train.p)
    if multiclass:
        model = fit_multiclass_eqc(train, theta, alpha_hat, config, scaling)
    elif learner in _ALPHA_FREE:
        model = fit_binary_eqc(train, theta, learner, config, scaling)
    else:
        model = fit_binary_eqc(train, theta, PenaltySpec(learner, alpha_hat), config, scaling)
    result = CvResult(
        np.asarray(thetas), np.asarray(alphas), table, per_fold,
        (theta_hat, alpha_hat), warnings,
    )
    return model, result
