"""Versioned flat-text model files.

Key = value lines, one section per fitted component. Floats are written
with repr so a load returns bit-identical values. Binary and multiclass
models share the format; the class-count header distinguishes them
(multiclass stores K-1 intercepts against the last class as reference).
"""

from __future__ import annotations

import numpy as np

from .binary import FittedEqc, VariableScaling
from .errors import ParseError
from .metalearners import Coefficients
from .multiclass import FittedMulticlassEqc, MulticlassCoefficients
from .quantiles import QuantileParams, QuantileTable

FORMAT_NAME = "eqc-model"
FORMAT_VERSION = 1


def _fmt_vec(v) -> str:
    return " ".join(repr(float(x)) for x in np.asarray(v, dtype=float))


def _parse_vec(s: str) -> np.ndarray:
    return np.array([float(tok) for tok in s.split()]) if s.strip() else np.empty(0)


def save_model(model: FittedEqc | FittedMulticlassEqc, path) -> None:
    multiclass = isinstance(model, FittedMulticlassEqc)
    lines = [
        f"format = {FORMAT_NAME}",
        f"version = {FORMAT_VERSION}",
        f"kind = {'multiclass-ridge' if multiclass else model.metalearner_kind}",
        f"n_classes = {model.table.n_classes}",
        f"n_variables = {model.table.p}",
        "class_ids = " + " ".join(str(int(k)) for k in model.table.class_ids),
        f"common_theta = {int(model.theta.common_theta)}",
        "theta = " + _fmt_vec(model.theta.theta),
    ]
    for i, k in enumerate(model.table.class_ids):
        lines.append(f"quantiles[{int(k)}] = " + _fmt_vec(model.table.q[i]))
    if multiclass:
        lines.append(f"lambda = {model.lam!r}")
        lines.append("intercepts = " + _fmt_vec(model.coef.intercepts))
    else:
        lines.append("intercepts = " + _fmt_vec([model.coef.intercept]))
    lines.append("weights = " + _fmt_vec(model.coef.weights))
    if model.scaling is not None:
        lines.append("scaling_center = " + _fmt_vec(model.scaling.center))
        lines.append("scaling_scale = " + _fmt_vec(model.scaling.scale))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> FittedEqc | FittedMulticlassEqc:
    fields: dict[str, str] = {}
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected 'key = value'", line=lineno)
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()

    def need(key: str) -> str:
        if key not in fields:
            raise ParseError(f"missing field {key!r}")
        return fields[key]

    if need("format") != FORMAT_NAME:
        raise ParseError(f"not a {FORMAT_NAME} file")
    if int(need("version")) != FORMAT_VERSION:
        raise ParseError(f"unsupported version {fields['version']}")
    kind = need("kind")
    n_classes = int(need("n_classes"))
    p = int(need("n_variables"))
    class_ids = np.array([int(t) for t in need("class_ids").split()])
    if class_ids.size != n_classes:
        raise ParseError("class_ids length disagrees with n_classes")
    theta = QuantileParams(_parse_vec(need("theta")),
                           common_theta=bool(int(need("common_theta"))))
    q = np.vstack([_parse_vec(need(f"quantiles[{int(k)}]")) for k in class_ids])
    if q.shape != (n_classes, p):
        raise ParseError("quantile rows disagree with declared shape")
    table = QuantileTable(q, theta, class_ids)
    scaling = None
    if "scaling_center" in fields:
        scaling = VariableScaling(
            _parse_vec(fields["scaling_center"]), _parse_vec(need("scaling_scale"))
        )
    intercepts = _parse_vec(need("intercepts"))
    weights = _parse_vec(need("weights"))
    if kind == "multiclass-ridge":
        coef = MulticlassCoefficients(weights, intercepts)
        return FittedMulticlassEqc(theta, table, coef, float(need("lambda")), scaling)
    if intercepts.size != 1:
        raise ParseError("binary model must have exactly one intercept")
    coef = Coefficients(float(intercepts[0]), weights)
    return FittedEqc(theta, table, coef, kind, scaling)
