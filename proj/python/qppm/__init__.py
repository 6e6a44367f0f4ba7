"""Quantum-kernel next-activity prediction for event logs."""

import json

from ._core import (
    ConfigError,
    DegenerateModelError,
    Error,
    SvmModel,
    cross,
    gram,
    kernel_overlap,
    log_stats,
    psd_repair,
    svm_fit,
    vqc_forward,
    xes_stats,
)
from ._core import run_bench as _run_bench

__all__ = [
    "ConfigError",
    "DegenerateModelError",
    "Error",
    "SvmModel",
    "cross",
    "gram",
    "kernel_overlap",
    "log_stats",
    "psd_repair",
    "run_bench",
    "svm_fit",
    "vqc_forward",
    "xes_stats",
]


def run_bench(config, base_dir="."):
    """Run a benchmark config (dict or JSON text) and return the parsed results."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_run_bench(text, base_dir))
