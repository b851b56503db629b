"""Binary discriminants built on quantile-difference features.

The plain quantile classifier (QC) sums the transformed features with
unit weights; its theta = 0.5 special case is the median classifier (MC).
The ensemble variants (EQC) learn an intercept and weights with one of
the regularized metalearners, which recovers QC exactly at unit weights
and zero intercept. A fitted model is an immutable bundle of quantile
parameters, quantile table, coefficients, and optional pre-scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DomainError, FitError
from .metalearners import (
    Coefficients,
    PenaltySpec,
    SolverConfig,
    SolverReport,
    fit_linear_svm,
    fit_penalized_logistic,
    _fit_logistic_newton,
)
from .quantiles import (
    QuantileParams,
    QuantileTable,
    degenerate_columns,
    estimate_quantile_table,
    quantile_difference_transform,
)

METALEARNER_KINDS = ("ridge", "lasso", "hinge", "logistic", "unit-weights", "oracle")


@dataclass(frozen=True)
class VariableScaling:
    """Per-variable (center, scale) applied before transformation."""

    center: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        s = np.asarray(self.scale, dtype=float)
        if c.shape != s.shape or c.ndim != 1:
            raise DomainError("center and scale must be vectors of equal length")
        if np.any(s <= 0) or not np.all(np.isfinite(s)) or not np.all(np.isfinite(c)):
            raise DomainError("scales must be positive and finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "scale", s)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.center) / self.scale


def compute_scaling(X: np.ndarray, method: str) -> VariableScaling:
    """Training-set scaling: 'sd' (mean/sd) or 'mad' (median/1.4826*MAD).

    Zero spreads fall back to scale 1 so constant columns stay well-defined.
    """
    X = np.asarray(X, dtype=float)
    if method == "sd":
        center = X.mean(axis=0)
        scale = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.ones(X.shape[1])
    elif method == "mad":
        center = np.median(X, axis=0)
        scale = 1.4826 * np.median(np.abs(X - center), axis=0)
    else:
        raise DomainError(f"unknown scaling method {method!r}")
    scale = np.where(scale > 0, scale, 1.0)
    return VariableScaling(center, scale)


@dataclass(frozen=True)
class FittedEqc:
    """Frozen binary model: everything prediction needs."""

    theta: QuantileParams
    table: QuantileTable
    coef: Coefficients
    metalearner_kind: str
    scaling: VariableScaling | None = None
    report: SolverReport | None = None

    def __post_init__(self):
        if self.metalearner_kind not in METALEARNER_KINDS:
            raise DomainError(f"unknown metalearner kind {self.metalearner_kind!r}")
        if self.table.n_classes != 2:
            raise DomainError("binary model requires a 2-class quantile table")
        if self.coef.weights.size != self.table.p:
            raise DomainError("weight vector length does not match the table")
        if self.scaling is not None and self.scaling.center.size != self.table.p:
            raise DomainError("scaling length does not match the table")

    @property
    def class_ids(self) -> np.ndarray:
        return self.table.class_ids


@dataclass(frozen=True)
class PopulationLossEstimate:
    """Monte Carlo estimate of the population binomial loss."""

    value: float
    mc_standard_error: float
    sample_size: int

    def __post_init__(self):
        if self.mc_standard_error < 0:
            raise DomainError("standard error cannot be negative")


def qc_discriminant(x, table: QuantileTable):
    """Unit-weight sum of transformed features; class 1 when <= 0.

    At theta = 0.5 this is the median classifier's discriminant
    sum_j (|x_j - m_1j| - |x_j - m_2j|) / 2.
    """
    if table.n_classes != 2:
        raise DomainError("QC requires exactly 2 classes")
    k1, k2 = table.class_ids
    z = quantile_difference_transform(x, table, int(k1), int(k2))
    # accumulate exactly like the weighted discriminant so the
    # unit-weight reduction identity is bit-exact
    return z @ np.ones(table.p)


def eqc_discriminant(x, model: FittedEqc):
    """Intercept plus weighted sum of transformed (optionally scaled) inputs."""
    x = np.asarray(x, dtype=float)
    if model.scaling is not None:
        x = model.scaling.apply(x)
    k1, k2 = model.table.class_ids
    z = quantile_difference_transform(x, model.table, int(k1), int(k2))
    return model.coef.intercept + z @ model.coef.weights


def predict_binary(x, model: FittedEqc):
    """Class label(s); the tie s = 0 goes to the first class."""
    s = np.asarray(eqc_discriminant(x, model))
    k1, k2 = model.table.class_ids
    out = np.where(s <= 0, k1, k2)
    return int(out) if out.ndim == 0 else out


def transform_dataset(
    data: Dataset, table: QuantileTable, scaling: VariableScaling | None = None
) -> np.ndarray:
    """Transformed feature matrix of a whole dataset (first vs second class)."""
    X = data.X if scaling is None else scaling.apply(data.X)
    k1, k2 = table.class_ids
    return quantile_difference_transform(X, table, int(k1), int(k2))


def fit_binary_eqc(
    train: Dataset,
    theta: QuantileParams,
    learner: PenaltySpec | str,
    config: SolverConfig = SolverConfig(),
    scaling: str | None = None,
) -> FittedEqc:
    """Estimate quantiles on train, transform, and fit the metalearner.

    learner is a PenaltySpec (ridge / lasso / hinge) or one of the strings
    'logistic' (unregularized logistic regression) and 'unit-weights'
    (pure QC: intercept 0, weights 1, no solver). Transformed columns that
    are constant on the training data are dropped before solving and get
    weight exactly 0; with the intercept unpenalized this is the exact
    optimum, not an approximation. EMC is this with theta fixed at 0.5 and
    a ridge penalty.
    """
    ids = train.class_ids
    if ids.size != 2:
        raise FitError(f"binary fit requires exactly 2 classes, got {ids.size}")
    table = None
    scaler = None
    if scaling is not None:
        scaler = compute_scaling(train.X, scaling)
        scaled = Dataset(scaler.apply(train.X), train.y)
        table = estimate_quantile_table(scaled, theta)
    else:
        table = estimate_quantile_table(train, theta)

    if isinstance(learner, str) and learner == "unit-weights":
        coef = Coefficients(0.0, np.ones(train.p))
        return FittedEqc(theta, table, coef, "unit-weights", scaler, None)

    Z = transform_dataset(train, table, scaler)
    y12 = np.where(train.y == ids[0], 1, 2)
    if np.min(np.bincount(y12)[1:]) < 2:
        raise FitError("each class needs at least 2 observations")

    drop = degenerate_columns(Z)
    Zs = Z[:, ~drop]

    if isinstance(learner, PenaltySpec):
        if learner.kind in ("ridge", "lasso"):
            coef_s, report = fit_penalized_logistic(Zs, y12, learner, config)
        else:
            coef_s, report = fit_linear_svm(Zs, y12, learner.value, config)
        kind = learner.kind
    elif learner == "logistic":
        coef_s, report = _fit_logistic_newton(Zs, (y12 - 1).astype(float), 0.0, config)
        kind = "logistic"
    else:
        raise DomainError(f"unknown learner {learner!r}")

    weights = np.zeros(train.p)
    weights[~drop] = coef_s.weights
    coef = Coefficients(coef_s.intercept, weights)
    return FittedEqc(theta, table, coef, kind, scaler, report)


def _loss_summands(model: FittedEqc, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    ids = model.class_ids
    mask = np.isin(y, ids)
    if not mask.all():
        raise DomainError("data contains labels the model was not fitted on")
    s = eqc_discriminant(X, model)
    y01 = (y == ids[1]).astype(float)
    return np.logaddexp(0.0, s) - y01 * s


def empirical_loss(model: FittedEqc, data: Dataset) -> float:
    """Unpenalized binomial loss of the model's discriminant on data."""
    return float(np.mean(_loss_summands(model, data.X, data.y)))


def estimate_population_loss(
    model: FittedEqc, generator, mc_samples: int, seed
) -> PopulationLossEstimate:
    """Monte Carlo population binomial loss under a labeled-sample generator.

    generator must expose sample_labeled(n, seed) drawing from the class
    mixture with its own priors (ALPopulation and ScenarioSpec both do).
    """
    if mc_samples < 1:
        raise DomainError("mc_samples must be at least 1")
    X, y = generator.sample_labeled(mc_samples, seed)
    vals = _loss_summands(model, X, y)
    se = float(vals.std(ddof=1) / np.sqrt(mc_samples)) if mc_samples > 1 else 0.0
    return PopulationLossEstimate(float(vals.mean()), se, mc_samples)


def oracle_classifier(pop, rescaled: bool = False) -> FittedEqc:
    """Bayes-optimal model for an asymmetric Laplace population.

    Assembles the closed-form parameters into a FittedEqc; with
    rescaled=True the matching per-coordinate (0, sd) scaling is attached
    so the discriminant is unchanged.
    """
    from .asymlaplace import al_oracle_coefficients

    theta, coef, table = al_oracle_coefficients(pop, rescaled=rescaled)
    scaler = None
    if rescaled:
        sd = np.array([a.sd for a in pop.class1])
        scaler = VariableScaling(np.zeros(pop.p), sd)
    return FittedEqc(theta, table, coef, "oracle", scaler, None)
