"""Operator CLI: provision, enroll, session, eval-stats, attack, export, error-model.

Every subcommand is deterministic given its --seed and writes its artifacts
under --out (default: $LATTICEPUF_OUTDIR or the working directory). Errors
print a single machine-parseable `ERROR: ...` line and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import attacks, crpio, fe, stats
from . import server as sv
from .device import Device
from .lfsr import bits_to_bytes, bytes_to_bits
from .lwe import LweParams, SecretKey, decryption_error_rate
from .pok import PokInstance
from .zq import make_rng


class CliError(Exception):
    pass


def _params_from(args) -> LweParams:
    return LweParams(args.n, args.q, args.m, args.alpha)


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=160)
    p.add_argument("--q", type=int, default=256)
    p.add_argument("--m", type=int, default=256)
    p.add_argument("--alpha", type=float, default=0.022)


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("LATTICEPUF_OUTDIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_device(dev: Device, device_id: str, path: Path) -> None:
    state = {
        "device_id": device_id,
        "params": {"n": dev.params.n, "q": dev.params.q, "m": dev.params.m, "alpha": dev.params.alpha},
        "fe_ber": dev.fe_config.ber_percent if dev.fe_config else None,
        "pok_ber": dev.pok_cells.ber if dev.pok_cells else None,
        "pok_enrollment_hex": bits_to_bytes(dev.pok_cells.enrollment_bits).hex() if dev.pok_cells else None,
        "helper_hex": dev.helper.to_bytes().hex() if dev.helper else None,
        "counter": dev.counter,
        "unsafe_raw_oracle": dev.unsafe_raw_oracle,
    }
    path.write_text(json.dumps(state, indent=2) + "\n")


def _load_device(path: Path) -> tuple[Device, str]:
    state = json.loads(path.read_text())
    params = LweParams(**state["params"])
    cfg = fe.CONFIGS[state["fe_ber"]] if state["fe_ber"] else None
    cells = None
    helper = None
    if state["pok_enrollment_hex"]:
        bits = bytes_to_bits(bytes.fromhex(state["pok_enrollment_hex"]))[: cfg.pok_bits]
        cells = PokInstance(bits, state["pok_ber"])
        helper = fe.HelperData.from_bytes(bytes.fromhex(state["helper_hex"]))
    dev = Device(
        params,
        cells,
        helper,
        cfg,
        counter=state["counter"],
        unsafe_raw_oracle=state["unsafe_raw_oracle"],
    )
    return dev, state["device_id"]


def cmd_provision(args) -> int:
    params = _params_from(args)
    cfg = fe.CONFIGS[args.fe_ber]
    rng = make_rng(args.seed)
    dev, sk = Device.provision(
        params, cfg, rng, ber=args.ber, unsafe_raw_oracle=args.unsafe_raw_oracle
    )
    out = _out_dir(args)
    dev_path = out / f"{args.device_id}.device.json"
    sec_path = out / f"{args.device_id}.secret.json"
    _save_device(dev, args.device_id, dev_path)
    sec_path.write_text(
        json.dumps(
            {
                "device_id": args.device_id,
                "params": {"n": params.n, "q": params.q, "m": params.m, "alpha": params.alpha},
                "s_packed_hex": bits_to_bytes(sk.packed).hex(),
            },
            indent=2,
        )
        + "\n"
    )
    print(f"provisioned {args.device_id}: {cfg.pok_bits} POK cells at {cfg.ber_percent}% raw BER")
    print(f"device state: {dev_path}")
    print(f"provisioning secret (hand to verifier): {sec_path}")
    return 0


def cmd_enroll(args) -> int:
    sec = json.loads(Path(args.secret).read_text())
    params = LweParams(**sec["params"])
    sk = SecretKey.from_packed(
        bytes_to_bits(bytes.fromhex(sec["s_packed_hex"]))[: params.secret_bits], params
    )
    reg_path = Path(args.registry)
    srv = sv.Server.load(reg_path) if reg_path.exists() else sv.Server()
    srv.enroll(sec["device_id"], sk, make_rng(args.seed), seed_mode=args.seed_mode)
    srv.save(reg_path)
    print(f"enrolled {sec['device_id']} into {reg_path} (seed mode {args.seed_mode})")
    return 0


def cmd_session(args) -> int:
    srv = sv.Server.load(args.registry)
    dev, device_id = _load_device(Path(args.device))
    rng = make_rng(args.seed)
    dev.power_up(rng)
    ses = srv.gen_session(device_id, args.bits, rng)
    frame = crpio.encode_session_frame(
        ses.challenge,
        counter_check=(ses.counter_used & 0xFF) if ses.challenge.counter_mode else None,
    )
    resp, counter_used = dev.respond(ses.challenge)
    accept, hd = sv.verify(ses.expected_response, resp, args.tau)
    mode = "counter128" if ses.challenge.counter_mode else "seed256"
    print(f"session: t={args.bits} counter={counter_used} frame={len(frame)}B")
    print(f"challenge payload: {crpio.challenge_payload_bits(args.bits, mode)} bits ({mode})")
    print(f"verify vs server expectation: hd={hd:.4f} accept={accept} (tau={args.tau})")
    hd_plain = float(np.count_nonzero(resp != ses.plaintexts)) / args.bits
    print(f"response vs plaintext error: {hd_plain:.4f}")
    srv.save(args.registry)
    _save_device(dev, device_id, Path(args.device))
    if args.assert_accept and not accept:
        raise CliError(f"authentication failed: hd={hd:.4f} > tau={args.tau}")
    return 0


def _assert_band(name: str, value: float, lo: float, hi: float, enabled: bool) -> None:
    line = f"{name}: {value:.4f} (band [{lo:.4f}, {hi:.4f}])"
    print(line)
    if enabled and not lo <= value <= hi:
        raise CliError(f"{name}={value:.4f} outside [{lo:.4f}, {hi:.4f}]")


def cmd_eval_stats(args) -> int:
    params = _params_from(args)
    rng = make_rng(args.seed)
    n_inst = 1000 if args.paper_scale else args.instances
    n_chal = 1000 if args.paper_scale else args.challenges
    cfg = fe.CONFIGS[args.fe_ber] if args.fe_ber else None
    pop = stats.make_population(n_inst, params, rng, fe_config=cfg)
    out = _out_dir(args)
    summaries = []
    metrics = ["uniformity", "uniqueness", "reliability"] if args.metric == "all" else [args.metric]
    mean_tol = 0.005 if args.paper_scale else 0.01
    for metric in metrics:
        if metric == "uniformity":
            summ = stats.eval_uniformity(pop, n_chal, rng)
            _assert_band("uniformity mean", summ.mean, 0.5 - mean_tol, 0.5 + mean_tol, args.do_assert)
            if args.paper_scale:
                _assert_band("uniformity std", summ.std, 0.0158 - 0.005, 0.0158 + 0.005, args.do_assert)
        elif metric == "uniqueness":
            summ = stats.eval_uniqueness(pop, n_chal, rng)
            _assert_band("uniqueness mean", summ.mean, 0.5 - mean_tol, 0.5 + mean_tol, args.do_assert)
            if args.paper_scale:
                _assert_band("uniqueness std", summ.std, 0.0158 - 0.005, 0.0158 + 0.005, args.do_assert)
        else:
            rate, summ = stats.mc_decryption_error(n_inst, n_chal, params, rng)
            lo, hi = (0.010, 0.016) if args.paper_scale else (0.004, 0.026)
            _assert_band("reliability mean", rate, lo, hi, args.do_assert)
        summaries.append(summ)
        stats.write_histogram_csv(summ, out / f"{metric}_hist.csv")
        if not args.no_figures:
            from . import plots

            plots.save_metric_histogram(summ, out / f"{metric}_hist.png")
    stats.write_summary_csv(summaries, out / "summary.csv")
    print(f"wrote {out/'summary.csv'} and per-metric histograms")
    return 0


def cmd_attack(args) -> int:
    params = _params_from(args)
    rng = make_rng(args.seed)
    s = rng.integers(0, params.q, size=params.n, dtype=np.int64)
    sk = SecretKey(s, params)
    dev = Device(params, None, None, None, sk=sk, unsafe_raw_oracle=args.unsafe_raw_oracle)
    if args.mode == "raw":
        if not args.unsafe_raw_oracle:
            raise CliError("raw mode needs --unsafe-raw-oracle (the defended device refuses chosen ciphertexts)")
        oracle = attacks.RawDecryptOracle.from_device(dev)
    else:
        oracle = attacks.SessionOracle(dev)
    result = attacks.active_attack(oracle, params, rng, query_budget=args.budget)
    if result.blocked:
        print("AttackBlocked: session interface exposes no caller-chosen challenge vector")
        return 3
    exact = np.array_equal(result.secret, s)
    print(
        f"recovered secret: exact={exact} queries={result.queries} rows={result.rows_used} "
        f"(budget {int(1.25*params.n)*params.q} at 25% slack)"
    )
    if not exact:
        raise CliError("recovered secret failed verification")
    return 0


def cmd_export(args) -> int:
    srv = sv.Server.load(args.registry)
    rng = make_rng(args.seed)
    if args.source == "prng":
        dev, device_id = _load_device(Path(args.device))
        dev.power_up(rng)
        manifest = crpio.export_crps(srv, dev, device_id, args.count, args.form, args.dataset, rng)
        srv.save(args.registry)
        _save_device(dev, device_id, Path(args.device))
    else:
        rec = srv.record(args.device_id)
        if args.form != "expanded":
            raise CliError("ciphertext-path exports are expanded-form only (no seed exists)")
        manifest = crpio.export_reference_crps(rec.sk, rec.e, args.count, args.dataset, rng)
    print(f"wrote {args.count} {manifest.form} CRPs ({manifest.challenge_source}) to {args.dataset}")
    print(f"sha256: {manifest.sha256}")
    return 0


def cmd_error_model(args) -> int:
    rate = decryption_error_rate(args.alpha, args.m)
    print(f"{rate:.4f}")
    if args.out:
        out = _out_dir(args)
        from . import plots

        csv_path = out / "error_model.csv"
        with open(csv_path, "w") as fh:
            fh.write("alpha,m,rate\n")
            fh.write(f"{args.alpha},{args.m},{rate:.6e}\n")
        plots.save_error_model_curve(args.m, out / "error_model.png")
        print(f"wrote {csv_path} and error_model.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latticepuf", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("provision", help="manufacture a device (POK + helper data)")
    p.add_argument("--device-id", required=True)
    p.add_argument("--fe-ber", type=int, default=5, choices=sorted(fe.CONFIGS))
    p.add_argument("--ber", type=float, default=None, help="override the raw POK BER")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--unsafe-raw-oracle", action="store_true")
    _add_param_flags(p)
    p.set_defaults(func=cmd_provision)

    p = sub.add_parser("enroll", help="register a provisioned device with the verifier")
    p.add_argument("--secret", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-mode", default="counter128", choices=["counter128", "seed256"])
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("session", help="run one authentication session")
    p.add_argument("--registry", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--bits", "-t", type=int, default=100)
    p.add_argument("--tau", type=float, default=sv.DEFAULT_TAU)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--assert", dest="assert_accept", action="store_true")
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("eval-stats", help="population statistics (CSV + figures)")
    p.add_argument("--metric", default="all", choices=["uniformity", "uniqueness", "reliability", "all"])
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--challenges", type=int, default=1000)
    p.add_argument("--paper-scale", action="store_true", help="1000 instances x 1000 challenges")
    p.add_argument("--fe-ber", type=int, default=None, choices=sorted(fe.CONFIGS),
                   help="manufacture instances through POK + FE at this raw BER")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--assert", dest="do_assert", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    _add_param_flags(p)
    p.set_defaults(func=cmd_eval_stats)

    p = sub.add_parser("attack", help="active secret-extraction attack demo")
    p.add_argument("--mode", required=True, choices=["raw", "counter"])
    p.add_argument("--unsafe-raw-oracle", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _add_param_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("export", help="export a CRP dataset")
    p.add_argument("--registry", required=True)
    p.add_argument("--device", default=None, help="device state file (prng source)")
    p.add_argument("--device-id", default=None, help="registry id (ciphertext source)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--form", default="expanded", choices=["compact", "expanded"])
    p.add_argument("--source", default="prng", choices=["prng", "ciphertext"])
    p.add_argument("--dataset", required=True, help="output dataset path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("error-model", help="analytic decryption error rate")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_error_model)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError, KeyError, PermissionError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
