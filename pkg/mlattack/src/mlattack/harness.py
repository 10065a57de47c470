"""Attack driver: train a configured model on CRPs, report held-out prediction error."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

from sklearn.kernel_approximation import Nystroem
from sklearn.linear_model import LogisticRegression
from sklearn.neural_network import MLPClassifier
from sklearn.pipeline import make_pipeline
from sklearn.svm import SVC, LinearSVC

from . import dataset

MODELS = ("lr", "svm", "nn1", "dnn")

# beyond this the exact RBF-kernel SVC is quadratic-infeasible on a desk CPU;
# Nystroem feature maps + a linear SVM stand in for it
SVM_EXACT_CAP = 20_000


@dataclass(frozen=True)
class AttackConfig:
    model: str  # lr | svm | nn1 | dnn
    dataset_path: str
    train_size: int
    test_size: int
    encoding: str = "binary"  # binary | integer
    seed: int = 0
    hidden: tuple[int, ...] = (100, 100, 100, 100)  # dnn layout
    epochs: int = 200
    batch_size: int = 256

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.train_size < 1 or self.test_size < 1:
            raise ValueError("train and test sizes must be positive")


@dataclass
class AttackReport:
    model: str
    encoding: str
    train_size: int
    test_size: int
    error: float
    seconds: float


def build_model(config: AttackConfig):
    if config.model == "lr":
        return LogisticRegression(max_iter=200, random_state=config.seed)
    if config.model == "svm":
        if config.train_size <= SVM_EXACT_CAP:
            return SVC(kernel="rbf", gamma="scale", random_state=config.seed)
        return make_pipeline(
            Nystroem(n_components=256, random_state=config.seed),
            LinearSVC(max_iter=5000, random_state=config.seed),
        )
    hidden = (100,) if config.model == "nn1" else tuple(config.hidden)
    return MLPClassifier(
        hidden_layer_sizes=hidden,
        activation="relu",
        solver="adam",
        batch_size=config.batch_size,
        max_iter=config.epochs,
        early_stopping=True,
        n_iter_no_change=4,
        validation_fraction=0.1,
        random_state=config.seed,
    )


def split(ds: dataset.Dataset, config: AttackConfig):
    """Train head, test tail; records are i.i.d. already, disjointness asserted."""
    total = ds.responses.size
    if config.train_size + config.test_size > total:
        raise ValueError(
            f"dataset holds {total} records; need {config.train_size}+{config.test_size}"
        )
    X = dataset.encode_features(ds, config.encoding)
    y = ds.responses
    return (
        X[: config.train_size],
        y[: config.train_size],
        X[total - config.test_size :],
        y[total - config.test_size :],
    )


def run_attack(config: AttackConfig, ds: dataset.Dataset | None = None) -> AttackReport:
    if ds is None:
        ds = dataset.load(config.dataset_path)
    X_tr, y_tr, X_te, y_te = split(ds, config)
    model = build_model(config)
    t0 = time.time()
    model.fit(X_tr, y_tr)
    error = float((model.predict(X_te) != y_te).mean())
    return AttackReport(
        config.model, config.encoding, config.train_size, config.test_size, error, time.time() - t0
    )


def sweep(config: AttackConfig, train_sizes: list[int], ds: dataset.Dataset | None = None) -> list[AttackReport]:
    """One report per ascending training size; the test tail stays fixed."""
    if sorted(train_sizes) != list(train_sizes):
        raise ValueError("training sizes must be ascending")
    if not train_sizes:
        return []
    if ds is None:
        ds = dataset.load(config.dataset_path)
    out = []
    for size in train_sizes:
        cfg = AttackConfig(
            config.model, config.dataset_path, size, config.test_size,
            config.encoding, config.seed, config.hidden, config.epochs, config.batch_size,
        )
        out.append(run_attack(cfg, ds=ds))
    return out


def write_reports_csv(reports: list[AttackReport], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "encoding", "train_size", "test_size", "error", "seconds"])
        for r in reports:
            w.writerow([r.model, r.encoding, r.train_size, r.test_size, f"{r.error:.6f}", f"{r.seconds:.2f}"])
