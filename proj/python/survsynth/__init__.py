"""Spline survival models, covariate synthesis and utility measures."""

import json

from ._core import (
    ModelContractError,
    NumericalError,
    SchemaError,
    SurvSynthError,
    fit as _fit,
    km_estimate,
    logrank_test,
    mann_whitney,
    null_pmse_moments,
    pmse,
    predict as _predict,
    prop_test,
    propensity_utility as _propensity_utility,
    read_columns as _read_columns,
    run_cli,
    simulate as _simulate,
    synthesize as _synthesize,
    ks_two_sample,
    welch_t,
)

__all__ = [
    "ModelContractError",
    "NumericalError",
    "SchemaError",
    "SurvSynthError",
    "fit",
    "km_estimate",
    "logrank_test",
    "mann_whitney",
    "null_pmse_moments",
    "pmse",
    "predict",
    "prop_test",
    "propensity_utility",
    "read_columns",
    "run_cli",
    "simulate",
    "synthesize",
    "ks_two_sample",
    "welch_t",
]


def _as_json(value):
    return value if isinstance(value, str) else json.dumps(value)


def fit(csv, schema, predictors=(), df=1, knots=None, max_iter=500, tol=1e-5):
    """Fit the model and return it as a dict."""
    text = _fit(csv, _as_json(schema), list(predictors), df, "" if knots is None else _as_json(knots), max_iter, tol)
    return json.loads(text)


def predict(model, t, z=()):
    return _predict(_as_json(model), t, list(z))


def synthesize(csv, schema, plan=None, seed=0, n=-1):
    return _synthesize(csv, _as_json(schema), "" if plan is None else _as_json(plan), seed, n)


def simulate(model, csv, schema, study_span, seed, emit_cause=False):
    return _simulate(_as_json(model), csv, _as_json(schema), study_span, seed, emit_cause)


def read_columns(csv, schema):
    return _read_columns(csv, _as_json(schema))


def propensity_utility(original_csv, synthetic_csv, schema, variables, interactions=False):
    return _propensity_utility(original_csv, synthetic_csv, _as_json(schema), list(variables), interactions)
