"""Python access to the Trojan/detector co-evolution toolkit."""

from ._trojan_game import (
    ConfigError,
    DivergenceError,
    IoError,
    Model,
    ParseError,
    ShapeError,
    accuracy,
    anomaly_report,
    auc,
    config_hash,
    init_model,
    js_proxy,
    load_model,
    make_blobs,
    optimal_discriminator_value,
    run_command,
    supermodularity_check,
    train_classifier,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "IoError",
    "Model",
    "ParseError",
    "ShapeError",
    "accuracy",
    "anomaly_report",
    "auc",
    "config_hash",
    "init_model",
    "js_proxy",
    "load_model",
    "make_blobs",
    "optimal_discriminator_value",
    "run_command",
    "supermodularity_check",
    "train_classifier",
]
