"""End-to-end steps behind the CLI subcommands.

Each function here is what one subcommand calls; the CLI only handles file
I/O and argument parsing around them.
"""

from __future__ import annotations

import datetime as _dt
import logging
import os
import warnings

import numpy as np

from .errors import ClassMissing, ConvergenceWarning, InvalidConfig, Unattainable
from .explore import PcaProjection, pca_fit, pca_transform
from .learn import (
    choose_threshold,
    cross_val_decision_values,
    decision_values,
    evaluate,
    pr_curve,
    predict,
    split_indices,
    sweep_C,
    train_svm,
)
from .learn.metrics import EvalReport, PrCurve
from .learn.svm import DEFAULT_C, DEFAULT_MAX_PASSES, DEFAULT_TOL
from .service.bundle import ModelBundle
from .telemetry import DriveLog, PotholeEvents
from .windows import (
    N_FEATURES,
    POTHOLE_WINDOW,
    ROAD_WINDOW,
    FeatureTable,
    Window,
    apply_scaler,
    attach_condition_label,
    attach_pothole_labels,
    attach_regime_labels,
    fit_scaler,
    make_windows,
)

log = logging.getLogger(__name__)

DEFAULT_GAMMA = 1.0 / N_FEATURES
DEFAULT_TEST_FRACTION = 0.3
DEFAULT_MIN_PRECISION = 0.78
CV_FOLDS = 5

TASKS = ("road", "pothole")


def featurize(
    log_: DriveLog,
    task: str,
    size: int | None = None,
    condition: int | None = None,
    events: PotholeEvents | None = None,
    regimes: np.ndarray | None = None,
) -> tuple[list[Window], int]:
    """Cut windows for ``task`` and label them from whichever source is given.

    Returns the windows and the number of pothole events that matched no
    window (always 0 for other label sources).
    """
    if task not in TASKS:
        raise InvalidConfig(f"unknown task {task!r}")
    size = size or (ROAD_WINDOW if task == "road" else POTHOLE_WINDOW)
    windows = make_windows(log_, size)
    unmatched = 0
    if condition is not None:
        windows = attach_condition_label(windows, condition)
    elif events is not None:
        windows, unmatched = attach_pothole_labels(windows, events)
    elif regimes is not None:
        windows = attach_regime_labels(windows, regimes)
    return windows, unmatched


def _labeled(table: FeatureTable, what: str) -> np.ndarray:
    if table.labels is None:
        raise ClassMissing(f"{what} features are unlabeled")
    return table.labels


def _trained_at() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch else _dt.datetime.now(_dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


def pick_threshold(X, y, min_precision: float = DEFAULT_MIN_PRECISION, seed: int = 0,
                   folds: int = CV_FOLDS, **svm_kwargs) -> tuple[float, bool]:
    """Decision threshold from out-of-fold scores on ``(X, y)``.

    Returns ``(threshold, fallback)``; when no point on the out-of-fold
    precision-recall curve reaches ``min_precision`` the threshold is 0 and
    ``fallback`` is True.
    """
    oof = cross_val_decision_values(X, y, folds=folds, seed=seed, **svm_kwargs)
    try:
        return choose_threshold(pr_curve(oof, y), min_precision), False
    except Unattainable:
        log.warning("no pothole threshold reaches precision %.2f; using 0", min_precision)
        return 0.0, True


def train_bundle(
    road: FeatureTable,
    pothole: FeatureTable,
    C: float = DEFAULT_C,
    gamma: float = DEFAULT_GAMMA,
    seed: int = 0,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    min_precision: float = DEFAULT_MIN_PRECISION,
    tol: float = DEFAULT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    road_window: int = ROAD_WINDOW,
    pothole_window: int = POTHOLE_WINDOW,
) -> tuple[ModelBundle, dict]:
    """Split, scale, train both task models and pick the pothole threshold.

    One scaler is fitted on the union of both tasks' training rows.  The
    pothole threshold comes from out-of-fold scores on the training split;
    if no threshold reaches ``min_precision`` it falls back to 0.  The report
    holds test-split metrics for both tasks.
    """
    y_road = _labeled(road, "road")
    y_pot = _labeled(pothole, "pothole")
    road_tr, road_te = split_indices(y_road, test_fraction, seed)
    pot_tr, pot_te = split_indices(y_pot, test_fraction, seed)
    scaler = fit_scaler(np.vstack([road.X[road_tr], pothole.X[pot_tr]]))
    Xr = apply_scaler(scaler, road.X)
    Xp = apply_scaler(scaler, pothole.X)

    svm_args = dict(C=C, gamma=gamma, tol=tol, max_passes=max_passes)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        road_model = train_svm(Xr[road_tr], y_road[road_tr], **svm_args)
        pot_model = train_svm(Xp[pot_tr], y_pot[pot_tr], **svm_args)
        threshold, fallback = pick_threshold(Xp[pot_tr], y_pot[pot_tr], min_precision, seed, **svm_args)
    converged = not any(issubclass(w.category, ConvergenceWarning) for w in caught)
    pot_model = pot_model.with_threshold(threshold)

    params = {
        "C": C,
        "gamma": gamma,
        "tol": tol,
        "max_passes": max_passes,
        "test_fraction": test_fraction,
    }
    road_report = evaluate(y_road[road_te], predict(road_model, Xr[road_te]))
    pot_report = evaluate(y_pot[pot_te], predict(pot_model, Xp[pot_te]))
    report = {
        "road": road_report.to_dict(seed, {**params, "window_size": road_window, "threshold": 0.0}),
        "pothole": pot_report.to_dict(
            seed,
            {
                **params,
                "window_size": pothole_window,
                "threshold": threshold,
                "min_precision": min_precision,
                "threshold_fallback": fallback,
            },
        ),
        "converged": converged,
    }
    bundle = ModelBundle(
        scaler,
        road_model,
        pot_model,
        road_window,
        pothole_window,
        {"trained_at": _trained_at(), "seed": seed, "params": params},
    )
    return bundle, report


def _task_model(bundle: ModelBundle, task: str):
    if task == "road":
        return bundle.road_model
    if task == "pothole":
        return bundle.pothole_model
    raise InvalidConfig(f"unknown task {task!r}")


def evaluate_bundle(bundle: ModelBundle, table: FeatureTable, task: str) -> EvalReport:
    model = _task_model(bundle, task)
    X = apply_scaler(bundle.scaler, table.X)
    return evaluate(_labeled(table, task), predict(model, X))


def bundle_pr_curve(bundle: ModelBundle, table: FeatureTable, task: str = "pothole") -> PrCurve:
    model = _task_model(bundle, task)
    scores = decision_values(model, apply_scaler(bundle.scaler, table.X))
    return pr_curve(scores, _labeled(table, task))


def sweep_table(
    table: FeatureTable,
    grid,
    gamma: float = DEFAULT_GAMMA,
    seed: int = 0,
    test_fraction: float = DEFAULT_TEST_FRACTION,
) -> list[tuple[float, float, float]]:
    y = _labeled(table, "sweep")
    tr, te = split_indices(y, test_fraction, seed)
    scaler = fit_scaler(table.X[tr])
    X = apply_scaler(scaler, table.X)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return sweep_C((X[tr], y[tr]), (X[te], y[te]), grid, gamma=gamma)


def format_sweep_csv(rows) -> str:
    lines = ["C,train_error,test_error"]
    lines.extend(f"{c!r},{tr!r},{te!r}" for c, tr, te in rows)
    return "\n".join(lines) + "\n"


def pca_table(table: FeatureTable, k: int = 3) -> tuple[PcaProjection, np.ndarray]:
    """Standardize the table's features, then project onto ``k`` principal axes."""
    X = apply_scaler(fit_scaler(table.X), table.X)
    proj = pca_fit(X, k)
    return proj, pca_transform(proj, X)
