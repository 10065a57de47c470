"""Population statistics: uniformity, uniqueness, reliability under the ciphertext distribution.

All metrics draw challenges from the seed-expanded session path (the
distribution the construction actually emits), never from uniform challenge
bits. Summaries are deterministic given the rng seed; plotting lives in the
CLI layer, this module only produces numbers and CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fe, server as sv, zq
from .device import Device
from .fe import FeConfig
from .lwe import LweParams, SecretKey
from .server import EnrollmentRecord

HIST_BIN_WIDTH = 0.005  # matches the 0.5% granularity of the reported histograms


@dataclass
class MetricSummary:
    name: str
    mean: float
    std: float
    count: int
    bin_edges: np.ndarray
    bin_counts: np.ndarray

    @classmethod
    def from_samples(cls, name: str, samples: np.ndarray) -> "MetricSummary":
        samples = np.asarray(samples, dtype=np.float64)
        edges = np.arange(0.0, 1.0 + HIST_BIN_WIDTH, HIST_BIN_WIDTH)
        counts, _ = np.histogram(samples, bins=edges)
        return cls(name, float(samples.mean()), float(samples.std()), samples.size, edges, counts)


@dataclass
class PopMember:
    device: Device
    record: EnrollmentRecord


def make_population(
    n_instances: int,
    params: LweParams,
    rng: np.random.Generator,
    fe_config: FeConfig | None = None,
) -> list[PopMember]:
    """Virtually manufacture instances with independent secrets.

    With an FE config, each device goes through POK manufacture, helper-data
    enrollment, and one power-up at the rated raw BER; without one, the
    secret is installed directly (reconstruction is orthogonal to the
    response statistics).
    """
    srv = sv.Server()
    members = []
    for i in range(n_instances):
        if fe_config is None:
            s = zq.sample_uniform_zq(params.q, rng, size=params.n)
            sk = SecretKey(s, params)
            dev = Device(params, None, None, None, sk=sk)
        else:
            dev, sk = Device.provision(params, fe_config, rng)
            dev.power_up(rng)
        rec = srv.enroll(f"inst{i:04d}", sk, rng)
        members.append(PopMember(dev, rec))
    return members


def _device_secret_matrix(members: list[PopMember]) -> np.ndarray:
    return np.stack([m.device.sk.s for m in members])


def eval_uniformity(
    members: list[PopMember],
    n_challenges: int,
    rng: np.random.Generator,
    chunk: int = 128,
    responder=None,
) -> MetricSummary:
    """Per-instance mean response weight over fresh ciphertext-distribution challenges.

    responder(members, batch) -> (D, t) bits replaces the real decryption
    path; the harness tests inject degenerate oracles through it.
    """
    if responder is None:
        responder = _respond_members
    weights = np.empty(len(members), dtype=np.float64)
    for lo in range(0, len(members), chunk):
        part = members[lo : lo + chunk]
        batch = sv.gen_population_sessions(
            [m.record for m in part], n_challenges, rng, advance=False
        )
        weights[lo : lo + len(part)] = responder(part, batch).mean(axis=1)
    return MetricSummary.from_samples("uniformity", weights)


def _respond_members(members: list[PopMember], batch) -> np.ndarray:
    return sv.respond_with_secrets(
        _device_secret_matrix(members),
        members[0].record.params,
        batch.seeds,
        batch.counters,
        batch.b,
    )


def eval_uniqueness(
    members: list[PopMember],
    n_challenges: int,
    rng: np.random.Generator,
    n_pairs: int | None = None,
    chunk: int = 128,
    responder=None,
) -> MetricSummary:
    """Inter-class HD over random instance pairs answering identical sessions.

    The pair is evaluated at a synchronized counter (both fresh devices see
    the donor's session verbatim), so the expanded challenges coincide.
    """
    if len(members) < 2:
        raise ValueError("uniqueness needs at least two instances")
    if responder is None:
        responder = _respond_members
    if n_pairs is None:
        n_pairs = len(members)
    idx = np.arange(len(members))
    pairs = np.empty((n_pairs, 2), dtype=np.int64)
    for k in range(n_pairs):
        pairs[k] = rng.choice(idx, size=2, replace=False)
    hds = np.empty(n_pairs, dtype=np.float64)
    for lo in range(0, n_pairs, chunk):
        sub = pairs[lo : lo + chunk]
        donors = [members[i] for i in sub[:, 0]]
        partners = [members[j] for j in sub[:, 1]]
        batch = sv.gen_population_sessions(
            [m.record for m in donors], n_challenges, rng, advance=False
        )
        r_i = responder(donors, batch)
        r_j = responder(partners, batch)
        hds[lo : lo + len(sub)] = (r_i != r_j).mean(axis=1)
    return MetricSummary.from_samples("uniqueness", hds)


def eval_reliability(
    member: PopMember,
    n_challenges: int,
    n_repeats: int,
    rng: np.random.Generator,
    fold_fe_failures: bool = False,
) -> MetricSummary:
    """Intra-class error of one instance: response vs encrypted plaintext, per repeat.

    By default key reconstruction is assumed perfect; fold_fe_failures
    powers the device up freshly per repeat and counts a failed
    reconstruction as an all-error repeat.
    """
    rates = np.empty(n_repeats, dtype=np.float64)
    for k in range(n_repeats):
        if fold_fe_failures:
            try:
                member.device.power_up(rng)
            except fe.ReconstructFailure:
                rates[k] = 1.0
                continue
        batch = sv.gen_population_sessions([member.record], n_challenges, rng, advance=False)
        resp = sv.respond_with_secrets(
            member.device.sk.s[None, :],
            member.record.params,
            batch.seeds,
            batch.counters,
            batch.b,
        )
        rates[k] = float((resp[0] != batch.plaintexts[0]).mean())
    return MetricSummary.from_samples("reliability", rates)


def mc_decryption_error(
    n_instances: int,
    bits_per_instance: int,
    params: LweParams,
    rng: np.random.Generator,
    chunk: int = 100,
) -> tuple[float, MetricSummary]:
    """Monte Carlo response-vs-plaintext error over fresh enrollments.

    Returns (population error rate, per-instance summary). Each instance is
    an independent (secret, noise vector) enrollment answering one
    bits_per_instance session.
    """
    recs = []
    for d in range(n_instances):
        s = zq.sample_uniform_zq(params.q, rng, size=params.n)
        e = zq.sample_discrete_gaussian(params.alpha, params.q, rng, size=params.m)
        recs.append(EnrollmentRecord(f"mc{d:05d}", SecretKey(s, params), e, 0, params))
    errors = 0
    per_instance = np.empty(n_instances, dtype=np.float64)
    for lo in range(0, n_instances, chunk):
        part = recs[lo : lo + chunk]
        batch = sv.gen_population_sessions(part, bits_per_instance, rng)
        diff = batch.expected != batch.plaintexts
        errors += int(np.count_nonzero(diff))
        per_instance[lo : lo + len(part)] = diff.mean(axis=1)
    rate = errors / (n_instances * bits_per_instance)
    return rate, MetricSummary.from_samples("reliability", per_instance)


def write_summary_csv(summaries: list[MetricSummary], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "mean", "std", "count"])
        for s in summaries:
            w.writerow([s.name, f"{s.mean:.6f}", f"{s.std:.6f}", s.count])


def write_histogram_csv(summary: MetricSummary, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(summary.bin_edges[:-1], summary.bin_edges[1:], summary.bin_counts):
            w.writerow([f"{lo:.4f}", f"{hi:.4f}", int(c)])
