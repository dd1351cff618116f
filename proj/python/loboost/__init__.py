"""Local conformal prediction intervals on gradient-boosted tree partitions."""

from ._loboost import (
    BoostConfig,
    Ensemble,
    GlobalCalibrator,
    LocalCalibrator,
    LoboostError,
    Partition,
    amc,
    build_partition,
    calibrate_global,
    calibrate_local,
    conformal_quantile,
    conformal_rank,
    fit,
    intervals,
    merge_regions,
    mse,
    oracle_interval,
    sample,
    smis,
    tree_weights,
)

__all__ = [
    "BoostConfig",
    "Ensemble",
    "GlobalCalibrator",
    "LocalCalibrator",
    "LoboostError",
    "Partition",
    "amc",
    "build_partition",
    "calibrate_global",
    "calibrate_local",
    "conformal_quantile",
    "conformal_rank",
    "fit",
    "intervals",
    "merge_regions",
    "mse",
    "oracle_interval",
    "sample",
    "smis",
    "tree_weights",
]
