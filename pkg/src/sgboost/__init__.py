"""Sparse-group boosting with ridge-penalized individual and group learners."""

from ._errors import NumericalError, SGBError, ValidationError
from .boosting import BoostConfig, FitResult, build_learners, coefficient_paths, fit, predict
from .design import GroupedDesign, design_from_groups, load_design, read_csv_design, thin_svd
from .evaluation import alpha_grid_search, kfold_cv, metric_report
from .ridge import effective_df, lambda_for_df, lambda_for_df_single, trace_df

__all__ = [
    "BoostConfig", "FitResult", "GroupedDesign", "NumericalError", "SGBError", "ValidationError",
    "alpha_grid_search", "build_learners", "coefficient_paths", "design_from_groups",
    "effective_df", "fit", "kfold_cv", "lambda_for_df", "lambda_for_df_single", "load_design",
    "metric_report", "predict", "read_csv_design", "thin_svd", "trace_df",
]
