"""Command-line front end.

Subcommands: gen (dataset CSV), train (model file), predict (label file),
table1 / table2 (TSV benchmark reports).  Exit codes: 0 on success, 1 on
usage errors (unknown flags, bad ranges, missing required output), 2 on
runtime failures (missing files, malformed inputs, solver trouble).

Stdout carries only results that are byte-identical for identical
arguments and seed; status lines (paths written, timings) go to stderr.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import classifier, dataset, experiments, trainer
from .oracle import MODES, InnerProductOracle
from .spin_chain import BOUNDARIES, ChainConfig


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we map usage to 1
        raise UsageError(message)


def _chain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=6, help="number of spins (default 6)")
    p.add_argument("--mu0", type=float, default=1.8, help="magnetization cutoff (default 1.8)")
    p.add_argument("--kj", type=int, default=1, help="bond profile index (default 1)")
    p.add_argument("--kd", type=int, default=9, help="transverse profile index (default 9)")
    p.add_argument("--gamma", type=float, default=0.2, help="uniform Z field (default 0.2)")
    p.add_argument("--boundary", choices=BOUNDARIES, default="periodic")


def _oracle_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--oracle", choices=MODES, default="gaussian")
    p.add_argument("--eps", type=float, default=1e-2, help="estimation half-width (default 0.01)")
    p.add_argument("--delta", type=float, default=0.1, help="failure probability (default 0.1)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> Parser:
    parser = Parser(prog="spinsvm", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS parallelism")
    sub = parser.add_subparsers(dest="command", parser_class=Parser)

    p = sub.add_parser("gen", help="sample a labeled dataset to CSV")
    _chain_flags(p)
    p.add_argument("--m", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("train", help="train on a dataset CSV")
    _chain_flags(p)
    _oracle_flags(p)
    p.add_argument("--data", required=True, help="training dataset CSV")
    p.add_argument("--C", type=float, default=1e4)
    p.add_argument("--tmax", type=int, default=50)
    p.add_argument("--out", help="output model path (required)")

    p = sub.add_parser("predict", help="label a dataset with a trained model")
    _chain_flags(p)
    _oracle_flags(p)
    p.set_defaults(oracle="exact")
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--train-data", required=True, help="CSV the model was trained on")
    p.add_argument("--data", required=True, help="CSV of points to classify")
    p.add_argument("--out", required=True, help="output predictions path")

    p = sub.add_parser("table1", help="training-set size sweep (fixed N=6 family)")
    p.add_argument("--m", type=int, nargs="+", default=list(experiments.TABLE1_M))
    p.add_argument("--oracle", choices=MODES, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-rbf", action="store_true", help="skip the RBF baseline column")
    p.add_argument("--out", help="output TSV path (default: stdout)")

    p = sub.add_parser("table2", help="chain-length sweep with random profiles")
    p.add_argument("--n", type=int, nargs="+", default=list(experiments.TABLE2_N))
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--oracle", choices=MODES, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output TSV path (default: stdout)")
    return parser


def _positive(name: str, value) -> None:
    if value is not None and not value > 0:
        raise UsageError(f"{name} must be positive, got {value}")


def _check_scope(m: int) -> None:
    if m > experiments.SIZE_CAP:
        raise UsageError(
            f"m = {m} is out of scope for this desk-scale build (cap {experiments.SIZE_CAP})"
        )


def _chain_config(args) -> ChainConfig:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.mu0 <= 0:
        raise UsageError(f"--mu0 must be positive, got {args.mu0}")
    if args.kj < 0 or args.kd < 0:
        raise UsageError("--kj and --kd must be >= 0")
    return ChainConfig(args.n, args.mu0, args.kj, args.kd, args.gamma, args.boundary)


def _cmd_gen(args) -> int:
    _positive("--m", args.m)
    _check_scope(args.m)
    config = _chain_config(args)
    ds = dataset.generate(config, args.m, args.seed)
    dataset.save(ds, args.out)
    print(
        f"wrote {ds.m} samples to {args.out} (balance {dataset.balance_ratio(ds):.4f})",
        file=sys.stderr,
    )
    return 0


def _cmd_train(args) -> int:
    if not args.out:
        raise UsageError("train requires --out for the model file")
    _positive("--C", args.C)
    _positive("--eps", args.eps)
    if not 0.0 < args.delta < 1.0:
        raise UsageError(f"--delta must lie in (0, 1), got {args.delta}")
    if args.tmax < 1:
        raise UsageError(f"--tmax must be >= 1, got {args.tmax}")
    config = _chain_config(args)
    t0 = time.perf_counter()
    ds = dataset.load(args.data, config)
    cfg = trainer.TrainConfig(C=args.C, eps=args.eps, delta=args.delta, t_max=args.tmax)
    orc = InnerProductOracle(args.oracle, seed=args.seed)
    model = trainer.train(ds, cfg, orc)
    trainer.save_model(model, args.out)
    print(
        f"iterations {model.iterations} ({model.terminated_by}), "
        f"xi_hat {model.xi_hat:.10g}, psi_min {model.psi_min:.10g}"
    )
    print(f"wrote model to {args.out}", file=sys.stderr)
    print(f"trained in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return 0


def _cmd_predict(args) -> int:
    config = _chain_config(args)
    model = trainer.load_model(args.model)
    train_ds = dataset.load(args.train_data, config)
    test_ds = dataset.load(args.data, config)
    orc = InnerProductOracle(args.oracle, seed=args.seed)
    preds = classifier.predict_many(
        model, train_ds, test_ds.psi_matrix, orc, args.eps, args.delta
    )
    with open(args.out, "w", encoding="ascii") as fh:
        fh.writelines(f"{int(p)}\n" for p in preds)
    accuracy = float(np.mean(preds == test_ds.labels))
    print(f"wrote {len(preds)} predictions to {args.out}", file=sys.stderr)
    print(f"accuracy {accuracy:.10g}")
    return 0


def _emit_report(report, out: str | None) -> None:
    if out:
        report.write_tsv(out)
        print(f"wrote report to {out}", file=sys.stderr)
    else:
        sys.stdout.write(report.to_tsv())
    print(report.summary(), file=sys.stderr)


def _cmd_table1(args) -> int:
    for m in args.m:
        _positive("--m", m)
        _check_scope(m)
    report = experiments.run_table1(
        m_values=tuple(args.m), seed=args.seed, oracle_mode=args.oracle, with_rbf=not args.no_rbf
    )
    _emit_report(report, args.out)
    return 0


def _cmd_table2(args) -> int:
    _positive("--m", args.m)
    _check_scope(args.m)
    _positive("--instances", args.instances)
    for n in args.n:
        if n < 2:
            raise UsageError(f"--n entries must be >= 2, got {n}")
    report = experiments.run_table2(
        n_values=tuple(args.n),
        instances=args.instances,
        m=args.m,
        seed=args.seed,
        oracle_mode=args.oracle,
    )
    _emit_report(report, args.out)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "table1": _cmd_table1,
    "table2": _cmd_table2,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand (gen, train, predict, table1, table2)")
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError(f"--threads must be >= 1, got {args.threads}")
            import threadpoolctl

            with threadpoolctl.threadpool_limits(args.threads):
                return _COMMANDS[args.command](args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
