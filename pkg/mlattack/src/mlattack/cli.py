"""CLI: run one attack, sweep training sizes, or emit the learnable control fixture."""

from __future__ import annotations

import argparse
import sys

from . import dataset
from .harness import AttackConfig, MODELS, run_attack, sweep, write_reports_csv


def cmd_run(args) -> int:
    config = AttackConfig(
        args.model, args.dataset, args.train, args.test, encoding=args.encoding, seed=args.seed
    )
    report = run_attack(config)
    print(
        f"{report.model} ({report.encoding}, train {report.train_size}): "
        f"prediction error {report.error:.4f} in {report.seconds:.1f}s"
    )
    if args.csv:
        write_reports_csv([report], args.csv)
    return 0


def cmd_sweep(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    ds = dataset.load(args.dataset)
    reports = []
    for model in args.models.split(","):
        config = AttackConfig(
            model, args.dataset, sizes[0], args.test, encoding=args.encoding, seed=args.seed
        )
        reports.extend(sweep(config, sizes, ds=ds))
    for r in reports:
        print(f"{r.model}\ttrain={r.train_size}\terror={r.error:.4f}\t{r.seconds:.1f}s")
    out_csv = args.csv or "sweep.csv"
    write_reports_csv(reports, out_csv)
    print(f"wrote {out_csv}")
    if args.plot:
        _plot_sweep(reports, args.plot)
        print(f"wrote {args.plot}")
    return 0


def _plot_sweep(reports, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    by_model: dict[str, list] = {}
    for r in reports:
        by_model.setdefault(r.model, []).append(r)
    for model, rs in by_model.items():
        ax.semilogx([r.train_size for r in rs], [100 * r.error for r in rs], "o-", label=model)
    ax.axhline(50, color="gray", ls="--", lw=1)
    ax.set_xlabel("training CRPs")
    ax.set_ylabel("prediction error (%)")
    ax.set_ylim(0, 60)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_make_toy(args) -> int:
    dataset.write_toy_dataset(args.out, args.count, seed=args.seed)
    print(f"wrote learnable control dataset ({args.count} records) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mlattack", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train one model, report held-out error")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--test", type=int, default=20000)
    p.add_argument("--encoding", default="binary", choices=["binary", "integer"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="error vs training-set size")
    p.add_argument("--dataset", required=True)
    p.add_argument("--models", default="lr")
    p.add_argument("--sizes", required=True, help="comma-separated ascending sizes")
    p.add_argument("--test", type=int, default=20000)
    p.add_argument("--encoding", default="binary", choices=["binary", "integer"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("make-toy", help="emit the learnable linear-threshold fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=30000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_toy)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
