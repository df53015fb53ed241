"""Command-line front end.

One subcommand per pipeline stage plus `synth` for dataset generation
and `run` for the whole experiment driven by a key=value config file.
Exits 0 on success; on failure prints `error [stage] ...` to stderr and
exits nonzero.
"""

import argparse
import sys

from . import centers as centers_mod
from . import data_io, hamming, model as model_mod, retrieval, synthetic
from .config import load_run_config
from .errors import CenterHashError, DimensionError, InvalidLabelError, StageError
from .pipeline import _stage, run_pipeline


def _cmd_gen_centers(args):
    with _stage("gen-centers"):
        if args.method == "hadamard":
            cs = centers_mod.generate_centers(args.m, args.k, args.seed)
        elif args.method == "balanced":
            cs = centers_mod.generate_centers_balanced(args.m, args.k, args.seed)
        else:
            cs = centers_mod.generate_centers_bernoulli(args.m, args.k, args.seed)
        centers_mod.save_centers(args.out, cs)
    report = centers_mod.validate_centers(cs)
    print(
        f"wrote {args.out}: m={cs.m} k={cs.k} method={cs.method.value} "
        f"mean_distance={report.mean_distance:.3f} valid={report.valid}"
    )


def _cmd_assign(args):
    with _stage("assign"):
        cs = centers_mod.load_centers(args.centers)
        labels = data_io.load_labels(args.labels)
        assignment = centers_mod.assign_multi_label(cs, labels, args.seed)
        hamming.save_codes(args.out, assignment.packed(), cs.k)
    print(f"wrote {args.out}: {assignment.n} samples, {len(assignment.by_label)} distinct label sets")


def _cmd_train(args):
    with _stage("train"):
        features = data_io.load_features(args.features)
        center_words, k = hamming.load_codes(args.centers_map)
        if args.k is not None and args.k != k:
            raise DimensionError(f"--k {args.k} does not match centers-map k={k}")
        if args.labels:
            labels = data_io.load_labels(args.labels)
            if labels.shape[0] != features.shape[0]:
                raise DimensionError(
                    f"{labels.shape[0]} label rows but {features.shape[0]} feature rows"
                )
        center_vectors = hamming.unpack_matrix(center_words, k)
        cfg = model_mod.TrainConfig(
            lambda1=args.lambda1,
            learning_rate=args.lr,
            momentum=args.momentum,
            batch_size=args.batch,
            epochs=args.epochs,
            seed=args.seed,
            use_lc=not args.no_lc,
            use_lq=not args.no_lq,
        )
        net, log = model_mod.train(features, center_vectors, cfg)
        model_mod.save_model(args.out_model, net)
    final = f", final loss {log[-1].total:.6f}" if log else ""
    print(f"wrote {args.out_model}: layers {net.layer_sizes}, {len(log)} epochs{final}")


def _cmd_encode(args):
    with _stage("encode"):
        net = model_mod.load_model(args.model)
        features = data_io.load_features(args.features)
        words = model_mod.encode(net, features)
        hamming.save_codes(args.out_codes, words, net.k)
    print(f"wrote {args.out_codes}: {words.shape[0]} codes of {net.k} bits")


def _cmd_eval(args):
    with _stage("eval"):
        db_words, db_k = hamming.load_codes(args.db_codes)
        db_labels = data_io.load_labels(args.db_labels)
        query_words, query_k = hamming.load_codes(args.query_codes)
        query_labels = data_io.load_labels(args.query_labels)
        if db_k != query_k:
            raise DimensionError(f"database codes have k={db_k}, queries k={query_k}")
        index = retrieval.CodeIndex(k=db_k, codes=db_words, labels=db_labels)
        report = retrieval.evaluate(index, query_words, query_labels, map_n=args.map_n)
        retrieval.write_report(args.out_report, report)
    print(
        f"wrote {args.out_report}: map@{args.map_n}={report.map_at_n:.6f} "
        f"p@h2={report.p_at_h2:.6f}"
    )


def _cmd_distmat(args):
    with _stage("distmat"):
        words, k = hamming.load_codes(args.codes)
        cs = centers_mod.load_centers(args.centers)
        if cs.k != k:
            raise DimensionError(f"codes have k={k}, centers k={cs.k}")
        assigned = data_io.load_labels(args.assignments)
        if not (assigned.sum(axis=1) == 1).all():
            raise InvalidLabelError("assignments must name exactly one center per code")
        groups = assigned.argmax(axis=1)
        matrix = retrieval.center_distance_matrix(words, groups, cs)
        lines = ["center_i,center_j,mean_distance"]
        for i in range(cs.m):
            for j in range(cs.m):
                lines.append(f"{i},{j},{float(matrix[i, j])!r}")
        with open(args.out, "w", newline="") as f:
            f.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {cs.m}x{cs.m} mean-distance matrix")


def _cmd_synth(args):
    with _stage("synth"):
        query_per_class = args.query_per_class
        if query_per_class is None:
            query_per_class = max(1, args.per_class // 10)
        train = synthetic.make_synthetic_blobs(
            args.classes, args.per_class, args.dim, args.spread, args.seed, split="train"
        )
        query = synthetic.make_synthetic_blobs(
            args.classes, query_per_class, args.dim, args.spread, args.seed, split="query"
        )
        written = []
        for ds in (train, query):
            fpath = f"{args.out_prefix}.{ds.split}.csqf"
            lpath = f"{args.out_prefix}.{ds.split}.csql"
            data_io.save_features(fpath, ds.features)
            data_io.save_labels(lpath, ds.labels)
            written += [fpath, lpath]
    for path in written:
        print(f"wrote {path}")


def _cmd_run(args):
    overrides = {}
    for key in (
        "k", "m", "method", "lambda1", "lr", "momentum", "batch", "epochs",
        "map_n", "seed", "out_dir",
        "train_features", "train_labels", "db_features", "db_labels",
        "query_features", "query_labels",
    ):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.no_lc:
        overrides["use_lc"] = False
    if args.no_lq:
        overrides["use_lq"] = False
    with _stage("config"):
        cfg = load_run_config(args.config, overrides)
    result = run_pipeline(cfg)
    print(f"wrote {result.paths['report']}")
    print(f"map@{cfg.map_n}={result.report.map_at_n:.6f} p@h2={result.report.p_at_h2:.6f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centerhash",
        description="Hash centers, central-similarity training, and Hamming retrieval evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-centers", help="generate and save a hash center set")
    p.add_argument("--k", type=int, required=True, help="code length in bits")
    p.add_argument("--m", type=int, required=True, help="number of centers")
    p.add_argument("--method", choices=["hadamard", "bernoulli", "balanced"], default="hadamard")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_centers)

    p = sub.add_parser("assign", help="assign a semantic center to every labeled sample")
    p.add_argument("--centers", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_assign)

    p = sub.add_parser("train", help="train the hash head on features and assigned centers")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", default="", help="optional, checked against the feature count")
    p.add_argument("--centers-map", required=True, dest="centers_map")
    p.add_argument("--k", type=int, default=None, help="optional, checked against the map")
    p.add_argument("--lambda1", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-lc", action="store_true", help="drop the center-similarity loss")
    p.add_argument("--no-lq", action="store_true", help="drop the quantization loss")
    p.add_argument("--out-model", required=True, dest="out_model")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("encode", help="binarize features through a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out-codes", required=True, dest="out_codes")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("eval", help="retrieval metrics for query codes against a database")
    p.add_argument("--db-codes", required=True, dest="db_codes")
    p.add_argument("--db-labels", required=True, dest="db_labels")
    p.add_argument("--query-codes", required=True, dest="query_codes")
    p.add_argument("--query-labels", required=True, dest="query_labels")
    p.add_argument("--map-n", type=int, default=100, dest="map_n")
    p.add_argument("--out-report", required=True, dest="out_report")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("distmat", help="mean code-to-center distance matrix")
    p.add_argument("--codes", required=True)
    p.add_argument("--assignments", required=True, help="label file naming one center per code")
    p.add_argument("--centers", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_distmat)

    p = sub.add_parser("synth", help="generate deterministic blob train/query splits")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True, dest="per_class")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--spread", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--query-per-class", type=int, default=None, dest="query_per_class",
                   help="queries per class (default: per-class // 10, at least 1)")
    p.add_argument("--out-prefix", required=True, dest="out_prefix")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--method", choices=["hadamard", "bernoulli", "balanced"], default=None)
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--momentum", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--map-n", type=int, default=None, dest="map_n")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-lc", action="store_true")
    p.add_argument("--no-lq", action="store_true")
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.add_argument("--train-features", default=None, dest="train_features")
    p.add_argument("--train-labels", default=None, dest="train_labels")
    p.add_argument("--db-features", default=None, dest="db_features")
    p.add_argument("--db-labels", default=None, dest="db_labels")
    p.add_argument("--query-features", default=None, dest="query_features")
    p.add_argument("--query-labels", default=None, dest="query_labels")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except CenterHashError as exc:
        print(f"error [{args.command}] {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
