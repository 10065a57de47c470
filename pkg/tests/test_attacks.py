import numpy as np
import pytest

from latticepuf import attacks, fe
from latticepuf.attacks import RawDecryptOracle, SessionOracle, Unsolvable
from latticepuf.device import Device
from latticepuf.lwe import LweParams, SecretKey
from latticepuf.zq import make_rng


def test_threshold_zero_secret():
    params = LweParams(n=4, q=256, m=8)
    oracle = RawDecryptOracle.from_secret(np.zeros(4, dtype=np.int64), params)
    a = np.array([7, 9, 100, 3], dtype=np.int64)
    b_hat = attacks.find_threshold_b(oracle, a)
    assert b_hat == 65  # q/4 + 1
    assert attacks.recover_dot(RawDecryptOracle.from_secret(np.zeros(4, dtype=np.int64), params), a) == 0


def test_recover_dot_matches_ground_truth():
    params = LweParams(n=4, q=256, m=8)
    rng = make_rng(0)
    for _ in range(10**3):
        s = rng.integers(0, 256, 4, dtype=np.int64)
        a = rng.integers(0, 256, 4, dtype=np.int64)
        oracle = RawDecryptOracle.from_secret(s, params)
        assert attacks.recover_dot(oracle, a) == int(a @ s) % 256


def test_sweep_costs_exactly_q_queries():
    params = LweParams(n=4, q=256, m=8)
    oracle = RawDecryptOracle.from_secret(np.arange(4, dtype=np.int64), params)
    attacks.find_threshold_b(oracle, np.array([1, 2, 3, 4], dtype=np.int64))
    assert oracle.queries == 256


def test_solver_identity_rows():
    q = 256
    n = 6
    s = np.array([3, 7, 0, 255, 9, 128], dtype=np.int64)
    rows = [(np.eye(n, dtype=np.int64)[i], int(s[i])) for i in range(n)]
    assert np.array_equal(attacks.solve_linear_mod_2k(rows, q), s)


def test_solver_random_systems():
    # q=16 leaves even pivots often enough that the row supplier matters
    rng = make_rng(1)
    q, n = 16, 4
    for _ in range(200):
        s = rng.integers(0, q, n, dtype=np.int64)

        def fresh_row():
            a = rng.integers(0, q, n, dtype=np.int64)
            return (a, int(a @ s) % q)

        rows = [fresh_row() for _ in range(n)]
        got = attacks.solve_linear_mod_2k(rows, q, more_rows=lambda: [fresh_row()])
        assert np.array_equal(got, s)


def test_solver_all_even_column_unsolvable():
    rows = [
        (np.array([2, 4, 6, 8]), 3),
        (np.array([4, 2, 2, 2]), 1),
        (np.array([6, 6, 4, 2]), 5),
        (np.array([2, 2, 8, 4]), 7),
    ]
    with pytest.raises(Unsolvable):
        attacks.solve_linear_mod_2k(rows, 16)


def test_active_attack_small_n_always_succeeds():
    rng = make_rng(2)
    params = LweParams(n=8, q=256, m=16)
    for _ in range(100):
        s = rng.integers(0, 256, 8, dtype=np.int64)
        oracle = RawDecryptOracle.from_secret(s, params)
        res = attacks.active_attack(oracle, params, rng)
        assert res.status == "recovered"
        assert np.array_equal(res.secret, s)


def test_active_attack_underdetermined_budget_unsolvable():
    rng = make_rng(3)
    params = LweParams(n=8, q=256, m=16)
    s = rng.integers(0, 256, 8, dtype=np.int64)
    oracle = RawDecryptOracle.from_secret(s, params)
    with pytest.raises(Unsolvable):
        attacks.active_attack(oracle, params, rng, query_budget=(params.n - 1) * params.q)


def test_counter_mode_blocked():
    rng = make_rng(4)
    params = LweParams(n=8, q=256, m=16)
    sk = SecretKey(rng.integers(0, 256, 8, dtype=np.int64), params)
    dev = Device(params, None, None, None, sk=sk)
    res = attacks.active_attack(SessionOracle(dev), params, rng)
    assert res.blocked and res.secret is None and res.queries == 0


def test_raw_oracle_gated_behind_unsafe_flag():
    rng = make_rng(5)
    params = LweParams(n=8, q=256, m=16)
    sk = SecretKey(rng.integers(0, 256, 8, dtype=np.int64), params)
    dev = Device(params, None, None, None, sk=sk)  # unsafe flag off
    with pytest.raises(PermissionError):
        RawDecryptOracle.from_device(dev)
    dev_unsafe = Device(params, None, None, None, sk=sk, unsafe_raw_oracle=True)
    oracle = RawDecryptOracle.from_device(dev_unsafe)
    res = attacks.active_attack(oracle, params, rng)
    assert np.array_equal(res.secret, sk.s)


def test_recovered_secret_satisfies_every_equation():
    rng = make_rng(6)
    params = LweParams(n=8, q=256, m=16)
    s = rng.integers(0, 256, 8, dtype=np.int64)
    oracle = RawDecryptOracle.from_secret(s, params)
    rows = []
    for _ in range(12):
        a = rng.integers(0, 256, 8, dtype=np.int64)
        rows.append((a, attacks.recover_dot(oracle, a)))
    got = attacks.solve_linear_mod_2k(rows, 256)
    for a, y in rows:
        assert int(a @ got) % 256 == y
