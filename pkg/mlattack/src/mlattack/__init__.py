"""Modeling-attack harness for exported PUF CRP datasets."""

from .dataset import Dataset, load, write_toy_dataset
from .harness import AttackConfig, AttackReport, run_attack, sweep

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "load",
    "write_toy_dataset",
    "AttackConfig",
    "AttackReport",
    "run_attack",
    "sweep",
    "__version__",
]
