from .binary import BinarySvmModel, ConvergenceWarning, decision_function, predict_binary, train_binary_svm
from .kernels import KernelSpec, kernel_eval, kernel_matrix, scale_gamma
from .multiclass import MulticlassSvmModel, predict_multiclass, predict_multiclass_batch, train_multiclass
from .voting import (
    TiePossibleWarning,
    VotingSvmModel,
    combine_votes,
    load_voting_svm,
    predict_voting,
    predict_voting_batch,
    save_voting_svm,
    train_voting_svm,
)

__all__ = [
    "BinarySvmModel", "ConvergenceWarning", "decision_function", "predict_binary", "train_binary_svm",
    "KernelSpec", "kernel_eval", "kernel_matrix", "scale_gamma",
    "MulticlassSvmModel", "predict_multiclass", "predict_multiclass_batch", "train_multiclass",
    "TiePossibleWarning", "VotingSvmModel", "combine_votes", "load_voting_svm",
    "predict_voting", "predict_voting_batch", "save_voting_svm", "train_voting_svm",
]
