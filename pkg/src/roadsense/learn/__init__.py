from .logreg import LogRegModel, logreg_decision, logreg_predict, loss_and_grad, majority_baseline, train_logreg
from .metrics import (
    Dataset,
    EvalReport,
    PrCurve,
    choose_threshold,
    evaluate,
    pr_curve,
    split_dataset,
    split_indices,
)
from .svm import (
    DEFAULT_C,
    SvmModel,
    cross_val_decision_values,
    decision_values,
    dual_objective,
    kkt_residuals,
    predict,
    rbf_kernel,
    smo_solve,
    sweep_C,
    train_svm,
)

__all__ = [
    "DEFAULT_C",
    "Dataset",
    "EvalReport",
    "LogRegModel",
    "PrCurve",
    "SvmModel",
    "choose_threshold",
    "cross_val_decision_values",
    "decision_values",
    "dual_objective",
    "evaluate",
    "kkt_residuals",
    "logreg_decision",
    "logreg_predict",
    "loss_and_grad",
    "majority_baseline",
    "pr_curve",
    "predict",
    "rbf_kernel",
    "smo_solve",
    "split_dataset",
    "split_indices",
    "sweep_C",
    "train_logreg",
    "train_svm",
]
