"""Command-line interface.

Errors go to stderr as one line, ``pairnet: error[<code>]: <message>``,
with exit status 1.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .blocks import TrainConfig
from .builders import build_metric_ensemble, grow_trained, metric_growth_blocks, train_ensemble
from .ensemble import Topology, add_class, expected_block_count, predict, predict_batch, predict_max_vote
from .errors import ConfigurationError, DegenerateSampleError, GrowthError, PairNetError
from .glyphs import generate_glyphs
from .grid import Dataset, check_dims, validate_dataset
from .persist import (
    block_bytes,
    is_idx,
    load_glyphs,
    load_idx,
    load_model,
    save_glyphs,
    save_model,
)

FORMULA = {Topology.FULL: "(N−1)N", Topology.COMPRESSED: "N(N−1)/2"}


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _emit(args, record: dict, text: str) -> None:
    if args.report == "jsonl":
        print(json.dumps(record))
    else:
        print(text)


def _load_dataset(path, labels_path, threshold) -> Dataset:
    if labels_path is not None or is_idx(path):
        if labels_path is None:
            raise _Fail("usage", f"{path} is an IDX image file; pass --labels")
        return load_idx(path, labels_path).binarize(threshold)
    return load_glyphs(path)


def _train_config(args, kind: str) -> TrainConfig:
    if kind == "perceptron":
        return TrainConfig(
            learning_rate=args.lr if args.lr is not None else 0.5,
            max_epochs=args.epochs,
            init_scale=args.init_scale,
            target_train_errors=args.target_errors,
        )
    return TrainConfig.gradient_descent(
        learning_rate=args.lr if args.lr is not None else 0.1,
        max_epochs=args.epochs,
        init_scale=args.init_scale,
        target_train_errors=args.target_errors,
    )


def _report_blocks(args, reports) -> int:
    warnings = 0
    for pair, rep in sorted(reports.items()):
        if not rep.converged:
            warnings += 1
        _emit(
            args,
            {
                "pair": list(pair),
                "epochs_run": rep.epochs_run,
                "final_train_errors": rep.final_train_errors,
                "converged": rep.converged,
            },
            f"block ({pair[0]},{pair[1]}): epochs={rep.epochs_run} train_errors={rep.final_train_errors} "
            f"converged={'yes' if rep.converged else 'no'}",
        )
    return warnings


# -- commands -------------------------------------------------------------------


def cmd_gen_glyphs(args) -> int:
    ds = generate_glyphs(args.classes, args.samples, args.noise, args.seed)
    save_glyphs(args.out, ds)
    print(f"wrote {len(ds)} glyphs ({args.classes} classes) to {args.out}")
    return 0


def cmd_build_metric(args) -> int:
    ds = _load_dataset(args.samples, args.labels, args.binarize)
    for idx, it in enumerate(ds.items):
        if not it.grid.cells.any():
            raise DegenerateSampleError(f"sample {idx} (label {it.label}) has no active cells")
    report = validate_dataset(ds)
    if not report.ok:
        raise ConfigurationError("; ".join(i.message for i in report.issues if i.fatal))
    variant = Topology(args.topology)
    e = build_metric_ensemble(ds.grids, ds.labels.tolist(), variant, args.binarize)
    want = expected_block_count(e.unit_count, variant)
    save_model(e, args.out)
    check = "OK" if e.block_count == want else "MISMATCH"
    print(f"{e.block_count} blocks ({variant.value})")
    print(f"units={e.unit_count} classes={e.class_count} threshold={e.unit_threshold}")
    print(f"block count check {FORMULA[variant]} = {want}: {check}")
    return 0 if check == "OK" else 1


def cmd_train(args) -> int:
    ds = _load_dataset(args.dataset, args.labels, args.binarize)
    if ds.class_count < 2:
        raise ConfigurationError("need at least 2 classes")
    report = validate_dataset(ds)
    if not report.ok:
        raise ConfigurationError("; ".join(i.message for i in report.issues if i.fatal))
    cfg = _train_config(args, args.kind)
    e, reports = train_ensemble(
        ds, args.kind, cfg, Topology(args.topology), args.seed, args.hidden, args.binarize, args.jobs
    )
    warnings = _report_blocks(args, reports)
    save_model(e, args.out)
    print(f"saved {e.block_count} blocks ({e.variant.value}) to {args.out}; warnings={warnings}", file=sys.stderr)
    return 0


def _input_grid(args, e):
    if is_idx(args.input):
        if args.labels is None:
            raise _Fail("usage", f"{args.input} is an IDX image file; pass --labels")
        ds = load_idx(args.input, args.labels).binarize(e.binarize_threshold)
    else:
        ds = load_glyphs(args.input)
    if not 0 <= args.index < len(ds):
        raise ConfigurationError(f"--index {args.index} out of range for {len(ds)} records")
    grid = ds.items[args.index].grid
    check_dims(e.dims, grid)
    return grid


def cmd_predict(args) -> int:
    e = load_model(args.model)
    grid = _input_grid(args, e)
    if args.fallback:
        mv = predict_max_vote(e, grid)
        _emit(
            args,
            {"decision": "class", "classes": [mv.label], "tie": mv.tie, "votes": list(mv.votes)},
            f"Class({mv.label}) tie={'yes' if mv.tie else 'no'} votes={list(mv.votes)}",
        )
        return 0
    d = predict(e, grid)
    _emit(
        args,
        {"decision": d.outcome, "classes": list(d.classes), "votes": list(d.votes), "fired_units": sorted(d.fired_units)},
        f"{d} votes={list(d.votes)}",
    )
    return 0


def evaluate(e, ds: Dataset) -> dict:
    if len(ds) == 0:
        raise ConfigurationError("empty dataset")
    for it in ds.items:
        check_dims(e.dims, it.grid)
    bd = predict_batch(e, ds.stack())
    y = ds.labels
    total = len(y)
    correct = int((bd.labels == y).sum())
    return {
        "total": total,
        "correct": correct,
        "no_decision": int((bd.labels == -1).sum()),
        "ambiguous": int((bd.labels == -2).sum()),
        "strict_acc": correct / total,
        "fallback_acc": float((bd.fallback == y).sum()) / total,
    }


def cmd_eval(args) -> int:
    e = load_model(args.model)
    ds = _load_dataset(args.dataset, args.labels, e.binarize_threshold)
    r = evaluate(e, ds)
    wrong = r["total"] - r["correct"] - r["no_decision"] - r["ambiguous"]
    _emit(
        args,
        r,
        f"total={r['total']} correct={r['correct']} wrong={wrong} no_decision={r['no_decision']} "
        f"ambiguous={r['ambiguous']} strict_acc={r['strict_acc']:.4f} fallback_acc={r['fallback_acc']:.4f}",
    )
    return 0


def _grow_metric(e, old: Dataset, new: Dataset):
    samples = old.grids
    if len(samples) != e.unit_count:
        raise GrowthError(f"--old-data has {len(samples)} samples but the model has {e.unit_count} units")
    rebuilt = build_metric_ensemble(samples, old.labels.tolist(), e.variant, e.binarize_threshold)
    if any(block_bytes(rebuilt.blocks[k]) != block_bytes(b) for k, b in e.blocks.items()):
        raise GrowthError("--old-data samples do not reproduce the model's metric weights")
    cls = e.class_count
    for grid in new.grids:
        check_dims(e.dims, grid)
        e = add_class(e, metric_growth_blocks(e, samples, grid), cls)
        samples = samples + [grid]
    return e


def cmd_add_class(args) -> int:
    e = load_model(args.model)
    new = _load_dataset(args.new_data, args.new_labels, e.binarize_threshold)
    if len(new) == 0:
        raise ConfigurationError("no examples for the new class")
    before = {k: block_bytes(b) for k, b in e.blocks.items()}
    b_old, n_old = e.unit_threshold, e.unit_count
    if args.old_data is None:
        pairs = [f"({i},{n_old})" for i in range(n_old)]
        raise GrowthError(f"--old-data is required to build the new pairs {' '.join(pairs)}")
    old = _load_dataset(args.old_data, args.old_labels, e.binarize_threshold)
    if e.kinds == {"metric"}:
        grown = _grow_metric(e, old, new)
    else:
        kind = next(iter(e.kinds))
        missing = [k for k in range(e.class_count) if not old.of_class(k)]
        if missing:
            pairs = [f"({k},{n_old})" for k in missing]
            raise GrowthError(f"no examples of old classes {missing}; cannot train pairs {' '.join(pairs)}")
        grown, reports = grow_trained(e, old, new.grids, _train_config(args, kind), args.seed, args.jobs)
        _report_blocks(args, reports)
    added = grown.block_count - e.block_count
    save_model(grown, args.out)
    print(f"added {added} blocks; threshold {b_old} → {grown.unit_threshold}")
    unchanged = all(block_bytes(grown.blocks[k]) == v for k, v in before.items())
    print(f"previous parameters unchanged: {'OK' if unchanged else 'FAIL'}")
    return 0 if unchanged else 1


def cmd_inspect(args) -> int:
    e = load_model(args.model)
    want = expected_block_count(e.unit_count, e.variant)
    verdict = "matches" if e.block_count == want else "does not match"
    print(f"{e.variant.value.capitalize()}, N={e.unit_count}, B={e.unit_threshold}, blocks={e.block_count} ({verdict} {FORMULA[e.variant]})")
    print(f"dims={e.dims[0]}x{e.dims[1]} binarize_threshold={e.binarize_threshold}")
    print("class groups: " + " ".join(f"{k}:{sorted(v)}" for k, v in e.class_groups.items()))
    for (i, j), b in e.blocks.items():
        extra = f" hidden={b.hidden_size}" if b.kind == "sigmoid" else ""
        print(f"block ({i},{j}) {b.kind}{extra}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="single source of randomness")
    common.add_argument("--report", choices=("text", "jsonl"), default="text")

    training = argparse.ArgumentParser(add_help=False)
    training.add_argument("--lr", type=float, default=None, help="default 0.5 (perceptron) / 0.1 (sigmoid)")
    training.add_argument("--epochs", type=int, default=1000)
    training.add_argument("--init-scale", type=float, default=0.1)
    training.add_argument("--target-errors", type=int, default=0)
    training.add_argument("--jobs", type=int, default=1)

    p = argparse.ArgumentParser(prog="pairnet", description="Pairwise image recognition networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-glyphs", parents=[common], help="write noisy 5x7 letter glyphs")
    s.add_argument("out")
    s.add_argument("--classes", type=int, default=3)
    s.add_argument("--samples", type=int, default=1, help="samples per class")
    s.add_argument("--noise", type=int, default=0, help="cells flipped per copy")
    s.set_defaults(func=cmd_gen_glyphs)

    s = sub.add_parser("build-metric", parents=[common], help="analytic nearest-sample network")
    s.add_argument("samples")
    s.add_argument("out")
    s.add_argument("--labels", help="IDX label file when SAMPLES is IDX")
    s.add_argument("--topology", choices=("compressed", "full"), default="compressed")
    s.add_argument("--binarize", type=float, default=0.5)
    s.set_defaults(func=cmd_build_metric)

    s = sub.add_parser("train", parents=[common, training], help="train one block per class pair")
    s.add_argument("dataset")
    s.add_argument("out")
    s.add_argument("--labels")
    s.add_argument("--kind", choices=("perceptron", "sigmoid"), default="perceptron")
    s.add_argument("--topology", choices=("compressed", "full"), default="compressed")
    s.add_argument("--hidden", type=int, default=8)
    s.add_argument("--binarize", type=float, default=0.5)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="classify one image")
    s.add_argument("model")
    s.add_argument("input")
    s.add_argument("--labels")
    s.add_argument("--index", type=int, default=0, help="record to classify")
    s.add_argument("--fallback", action="store_true", help="max-vote rule instead of the strict rule")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", parents=[common], help="accuracy on a labeled dataset")
    s.add_argument("model")
    s.add_argument("dataset")
    s.add_argument("--labels")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("add-class", parents=[common, training], help="grow the network by one class")
    s.add_argument("model")
    s.add_argument("new_data")
    s.add_argument("out")
    s.add_argument("--new-labels")
    s.add_argument("--old-data", help="samples (metric) or training data (trained) of the existing classes")
    s.add_argument("--old-labels")
    s.set_defaults(func=cmd_add_class)

    s = sub.add_parser("inspect", parents=[common], help="print the network structure")
    s.add_argument("model")
    s.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PairNetError, _Fail) as exc:
        code, msg = exc.code, str(exc)
    except OSError as exc:
        code, msg = "io", f"{exc.strerror}: {exc.filename}"
    msg = " ".join(msg.split())
    print(f"pairnet: error[{code}]: {msg}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
