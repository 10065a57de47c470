import subprocess
import sys

import pytest

from mlattack import dataset


def run_producer_cli(*args) -> None:
    """Drive the PUF package strictly through its command-line interface."""
    proc = subprocess.run(
        [sys.executable, "-m", "latticepuf.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr


@pytest.fixture(scope="session")
def lattice_dataset_path(tmp_path_factory):
    """120k expanded CRPs exported by the producer CLI (train 1e5 + test 2e4)."""
    td = tmp_path_factory.mktemp("lattice_ds")
    run_producer_cli("provision", "--device-id", "t0", "--fe-ber", "5", "--seed", "101", "--out", str(td))
    run_producer_cli("enroll", "--secret", str(td / "t0.secret.json"),
                     "--registry", str(td / "registry.txt"), "--seed", "102")
    out = td / "t0.crp"
    run_producer_cli("export", "--registry", str(td / "registry.txt"),
                     "--device", str(td / "t0.device.json"),
                     "--count", "120000", "--form", "expanded",
                     "--dataset", str(out), "--seed", "103")
    return out


@pytest.fixture(scope="session")
def lattice_dataset(lattice_dataset_path):
    return dataset.load(lattice_dataset_path)


@pytest.fixture(scope="session")
def toy_dataset_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("toy_ds") / "toy.crp"
    dataset.write_toy_dataset(path, 50_000, seed=7)
    return path


@pytest.fixture(scope="session")
def toy_dataset(toy_dataset_path):
    return dataset.load(toy_dataset_path)
