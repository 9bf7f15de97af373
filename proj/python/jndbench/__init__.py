"""Benchmarking toolkit for full-reference image quality metrics against
JND-scaled subjective scores."""

from jndbench._core import (
    JndbenchError,
    LogisticParams,
    MrrResult,
    WilcoxonResult,
    __version__,
    apply_logistic,
    boost_map,
    clamp_infinite_scores,
    compute_all,
    criteria_report,
    default_bandwidth_grid,
    fit_logistic,
    fractional_ranks,
    gmsd,
    haar_psi,
    kendall_tau,
    llr,
    loo_cv_bandwidth,
    mrr_from_correlations,
    mrr_test,
    ms_ssim,
    nlpd,
    nw_regress,
    outlier_ratio,
    plcc,
    psnr_y,
    pwrc_auc,
    pwrc_curve,
    rd_curve,
    rmse,
    srocc,
    ssim,
    uqi,
    wilcoxon_test,
    z_rmse,
)

__all__ = [
    "JndbenchError",
    "LogisticParams",
    "MrrResult",
    "WilcoxonResult",
    "__version__",
    "apply_logistic",
    "boost_map",
    "clamp_infinite_scores",
    "compute_all",
    "criteria_report",
    "default_bandwidth_grid",
    "fit_logistic",
    "fractional_ranks",
    "gmsd",
    "haar_psi",
    "kendall_tau",
    "llr",
    "loo_cv_bandwidth",
    "mrr_from_correlations",
    "mrr_test",
    "ms_ssim",
    "nlpd",
    "nw_regress",
    "outlier_ratio",
    "plcc",
    "psnr_y",
    "pwrc_auc",
    "pwrc_curve",
    "rd_curve",
    "rmse",
    "srocc",
    "ssim",
    "uqi",
    "wilcoxon_test",
    "z_rmse",
]
