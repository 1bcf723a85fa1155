"""Command-line entry point.

Subcommands: stats, gen-synth, train, eval, analyze, check-grad.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Unknown flags are usage errors. All randomness hangs off --seed flags, so
identical invocations produce identical outputs (train and check-grad have
--no-timing to drop the only wall-clock fields).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, replace

import numpy as np

from . import analysis
from .data import (SynthSpec, build_bundle, compare_reference, dataset_stats,
                   load_bundle_dir, load_bundle_files, synthetic_raw_triples,
                   write_split_files)
from .errors import DataError, NumericError, UsageError
from .evaluate import evaluate
from .gradcheck import DEFAULT_DRAWS, DEFAULT_KS, TOLERANCE, report_lines, run_check
from .model import load_checkpoint
from .train import TrainConfig, load_config_file, train

TRIPLE_FORMAT = "triple files: one triple per line, tab-separated head/relation/tail, UTF-8"


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems through the exit-code contract
    instead of exiting the process."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool_text(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true"):
        return True
    if lowered in ("0", "false"):
        return False
    raise ValueError(f"expected 0/1/true/false, got {text!r}")


def _int_list(text: str) -> list:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)


def _chunks(items: list, n: int) -> list:
    if not items:
        return [items]
    size = (len(items) + n - 1) // n
    return [items[i:i + size] for i in range(0, len(items), size)]


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_stats(args) -> int:
    if args.data_dir is not None:
        if args.train or args.valid or args.test:
            raise UsageError("stats: pass either --data-dir or --train/--valid/--test, not both")
        bundle = load_bundle_dir(args.data_dir)
    else:
        missing = [flag for flag, v in (("--train", args.train), ("--valid", args.valid),
                                        ("--test", args.test)) if not v]
        if missing:
            raise UsageError(f"stats: missing {', '.join(missing)} (or pass --data-dir)")
        bundle = load_bundle_files(args.train, args.valid, args.test)
    stats = dataset_stats(bundle)
    print(stats.table())
    for line in stats.kv_lines():
        print(line)
    if args.reference is not None:
        rows = compare_reference(stats, args.reference)
        if rows:
            print(f"reference={args.reference} mismatches={len(rows)}")
            for field, actual, ref in rows:
                print(f"mismatch field={field} file={actual} reference={ref}")
        else:
            print(f"reference={args.reference} match=ok")
    return 0


def _cmd_gen_synth(args) -> int:
    try:
        spec = SynthSpec(depth=args.depth, branching=args.branching,
                         seed=args.seed, sibling_fraction=args.sibling_fraction)
    except ValueError as exc:
        raise UsageError(f"gen-synth: {exc}") from None
    raws = synthetic_raw_triples(spec)
    bundle = build_bundle(*raws)
    write_split_files(args.out_dir, *raws)
    print(f"out_dir={args.out_dir}")
    for line in dataset_stats(bundle).kv_lines():
        print(line)
    return 0


def _cmd_train(args) -> int:
    config = load_config_file(args.config) if args.config else TrainConfig()
    overrides = {f.name: getattr(args, f.name) for f in fields(TrainConfig)
                 if getattr(args, f.name) is not None}
    config = replace(config, **overrides).validate()
    bundle = load_bundle_dir(args.data_dir)
    train(bundle, config, out_dir=args.out_dir, log_fn=print,
          timing=not args.no_timing)
    return 0


def _load_matching(ckpt_path: str, data_dir: str):
    params = load_checkpoint(ckpt_path)
    bundle = load_bundle_dir(data_dir)
    if (params.n_entities, params.n_relations) != (bundle.n_entities, bundle.n_relations):
        raise DataError(
            f"checkpoint {ckpt_path} has {params.n_entities} entities / "
            f"{params.n_relations} relations but {data_dir} has "
            f"{bundle.n_entities} / {bundle.n_relations}")
    return params, bundle


def _cmd_eval(args) -> int:
    params, bundle = _load_matching(args.ckpt, args.data_dir)
    split = bundle.valid if args.split == "valid" else bundle.test
    report = evaluate(params, split, bundle, workers=args.workers)
    print(report.table())
    print(report.kv_line())
    return 0


def _require(args, what: str, flag: str):
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise UsageError(f"analyze --what {what} requires {flag}")
    return value


def _pmap(fn, chunks: list, workers: int) -> list:
    if workers <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _cmd_analyze(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    params = load_checkpoint(args.ckpt)
    what = args.what

    if what in ("rel-mod-hist", "rel-phase-hist"):
        rel_id = _require(args, what, "--relation")
        op = (analysis.relation_modulus_histogram if what == "rel-mod-hist"
              else analysis.relation_phase_histogram)
        text = analysis.histogram_csv(op(params, rel_id, bins=args.bins))
    elif what == "ent-mod-hist":
        text = analysis.histogram_csv(analysis.entity_modulus_histogram(params, bins=args.bins))
    elif what == "polar":
        ids = args.entities if args.entities is not None else list(range(params.n_entities))
        groups = _pmap(lambda g: analysis.entity_polar_export(params, g, args.log_scale),
                       _chunks(ids, args.workers), args.workers)
        text = analysis.polar_csv([row for g in groups for row in g])
    elif what == "signs":
        data_dir = _require(args, what, "--data-dir")
        bundle = load_bundle_dir(data_dir)
        if bundle.n_entities != params.n_entities:
            raise DataError(f"checkpoint {args.ckpt} has {params.n_entities} entities "
                            f"but {data_dir} has {bundle.n_entities}")
        rng = np.random.default_rng(args.seed)
        linked, unlinked = analysis.linked_unlinked_pairs(bundle, rng, args.max_pairs)
        pairs = linked + unlinked
        labels = ["linked"] * len(linked) + ["unlinked"] * len(unlinked)
        chunk_bounds = _chunks(list(range(len(pairs))), args.workers)
        groups = _pmap(lambda idx: [(idx[0] + i, lab, c) for i, (_, lab, c) in enumerate(
            analysis.sign_agreement_counts(params, [pairs[j] for j in idx],
                                           [labels[j] for j in idx]))],
            chunk_bounds, args.workers)
        note = ("note=unlinked pairs are rejection-sampled against the filter; "
                "pairs related through unobserved triples can still appear")
        # keep stdout parseable when the CSV itself goes to stdout
        print(note, file=sys.stdout if args.out is not None else sys.stderr)
        text = analysis.signs_csv([row for g in groups for row in g])
    elif what == "pattern":
        pattern = _require(args, what, "--pattern")
        rel_ids = _require(args, what, "--relations")
        text = analysis.pattern_csv(analysis.pattern_residual(params, rel_ids, pattern))
    else:  # argparse choices already reject this
        raise UsageError(f"unknown --what {what!r}")

    _emit(text, args.out)
    return 0


def _cmd_check_grad(args) -> int:
    ks = (args.k,) if args.k is not None else DEFAULT_KS
    report = run_check(draws=args.draws, ks=ks, seed=args.seed)
    for line in report_lines(report, timing=not args.no_timing):
        print(line)
    if not report.ok:
        raise NumericError(
            f"max relative error {report.max_rel_err:.3e} exceeds tolerance {TOLERANCE:.0e}")
    return 0


# ---------------------------------------------------------------------------
# parser construction
# ---------------------------------------------------------------------------

def _add_train_flags(p: _Parser) -> None:
    """One flag per TrainConfig field; unset flags fall back to --config
    values, then to built-in defaults."""
    p.add_argument("--k", type=int, help="embedding dimensions per part")
    p.add_argument("--gamma", type=float, help="margin in the loss")
    p.add_argument("--alpha", type=float, help="self-adversarial temperature")
    p.add_argument("--n-neg", type=int, help="negative samples per positive")
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--batch-size", type=int, help="positives per step")
    p.add_argument("--max-steps", type=int, help="total training steps")
    p.add_argument("--adam-beta1", type=float, help="Adam first-moment decay")
    p.add_argument("--adam-beta2", type=float, help="Adam second-moment decay")
    p.add_argument("--adam-eps", type=float, help="Adam denominator epsilon")
    p.add_argument("--seed", type=int, help="RNG seed for init and sampling")
    p.add_argument("--variant", choices=("full", "modulus_only", "phase_only", "mode"),
                   help="scoring variant")
    p.add_argument("--bias", type=_bool_text, help="mixture bias on the modulus part (0/1)")
    p.add_argument("--lambda-mod", type=float, help="modulus distance weight")
    p.add_argument("--lambda-phase", type=float, help="phase distance weight")
    p.add_argument("--neg-mode", choices=("head", "tail", "both-alternating"),
                   help="which side negatives corrupt")
    p.add_argument("--self-adversarial", type=_bool_text,
                   help="weight negatives by softmax of their scores (0/1)")
    p.add_argument("--train-lambdas", type=_bool_text,
                   help="learn the distance weights (0/1)")
    p.add_argument("--checkpoint-every", type=int, help="steps between checkpoints")


def build_parser() -> _Parser:
    parser = _Parser(prog="hake", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser,
                                metavar="{stats,gen-synth,train,eval,analyze,check-grad}")

    p = sub.add_parser("stats", help="dataset split counts",
                       description="Print entity/relation/split counts for a dataset.",
                       epilog=TRIPLE_FORMAT)
    p.add_argument("--data-dir", help="directory holding train.txt/valid.txt/test.txt")
    p.add_argument("--train", help="train triples path")
    p.add_argument("--valid", help="validation triples path")
    p.add_argument("--test", help="test triples path")
    p.add_argument("--reference", choices=("wn18rr", "fb15k-237", "yago3-10"),
                   help="cross-check counts against published statistics; "
                        "mismatches are reported, not fatal")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("gen-synth", help="generate a synthetic hierarchy KG",
                       description="Write a synthetic tree-shaped KG as train/valid/test files.",
                       epilog=TRIPLE_FORMAT)
    p.add_argument("--depth", type=int, default=4, help="tree depth (root = 0)")
    p.add_argument("--branching", type=int, default=3, help="children per node")
    p.add_argument("--sibling-fraction", type=float, default=0.5,
                   help="fraction of same-parent leaf pairs made similar_to")
    p.add_argument("--seed", type=int, default=0, help="split shuffle seed")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("train", help="train a model",
                       description="Train on a data directory; flags beat --config beats defaults.",
                       epilog="config file: flat key=value lines, one per TrainConfig field;\n"
                              "# comments and blank lines allowed; unknown keys are errors.\n"
                              + TRIPLE_FORMAT)
    p.add_argument("--data-dir", required=True, help="directory with train/valid/test files")
    p.add_argument("--out-dir", help="checkpoint directory (step_<n>.ckpt, latest.ckpt)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--no-timing", action="store_true",
                   help="omit ms_per_step from logs (byte-identical reruns)")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="filtered link-prediction metrics",
                       description="Evaluate a checkpoint under the filtered protocol.",
                       epilog=TRIPLE_FORMAT)
    p.add_argument("--ckpt", required=True, help="checkpoint path")
    p.add_argument("--data-dir", required=True, help="directory with train/valid/test files")
    p.add_argument("--split", choices=("valid", "test"), default="test",
                   help="split to rank (default test)")
    p.add_argument("--workers", type=int, default=1, help="parallel ranking threads")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("analyze", help="diagnostics CSVs from a checkpoint",
                       description="Export diagnostics as CSV (stdout, or --out).",
                       epilog="schemas: histograms bin_lo,bin_hi,count; polar entity,dim,radius,angle;\n"
                              "signs pair_id,label,diff_signs; pattern pattern,dim,mod_residual,phase_residual")
    p.add_argument("--ckpt", required=True, help="checkpoint path")
    p.add_argument("--what", required=True,
                   choices=("rel-mod-hist", "rel-phase-hist", "polar", "signs",
                            "ent-mod-hist", "pattern"),
                   help="which diagnostic to export")
    p.add_argument("--relation", type=int, help="relation id (rel-*-hist)")
    p.add_argument("--relations", type=_int_list,
                   help="comma-separated relation ids (pattern)")
    p.add_argument("--pattern", choices=("symmetry", "inversion", "composition"),
                   help="pattern to check (pattern)")
    p.add_argument("--entities", type=_int_list,
                   help="comma-separated entity ids (polar; default all)")
    p.add_argument("--bins", type=int, default=30, help="histogram bins")
    p.add_argument("--log-scale", action="store_true",
                   help="polar: radius = -log10(|modulus|), floor 1e-8")
    p.add_argument("--data-dir", help="dataset directory (signs)")
    p.add_argument("--seed", type=int, default=0, help="unlinked-pair sampling seed (signs)")
    p.add_argument("--max-pairs", type=int, help="cap on linked pairs (signs)")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel threads for polar/signs row building")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("check-grad", help="finite-difference gradient check",
                       description="Compare analytic score/loss gradients against central "
                                   "differences at random smooth points; exit 3 when the "
                                   "worst relative error exceeds 1e-5.")
    p.add_argument("--seed", type=int, default=0, help="draw seed")
    p.add_argument("--draws", type=int, default=DEFAULT_DRAWS, help="number of random draws")
    p.add_argument("--k", type=int, help="restrict to one embedding size "
                                         "(default: cycle 2, 8, 32)")
    p.add_argument("--no-timing", action="store_true", help="omit the elapsed_s line")
    p.set_defaults(func=_cmd_check_grad)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
