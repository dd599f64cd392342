"""Command-line front end.

Subcommands: ``reduce`` (full pipeline on a tensor dump), ``cluster`` (one
clusterer on a vector file), ``synth`` (deterministic synthetic dumps with
ground truth), ``layer-select`` (key-spread diagnostic over per-layer
dumps), ``compare`` (clusterer comparison on a labeled dump).

Exit codes: 0 success, 1 threshold not met (layer-select), 2 invalid flag
values, 3 I/O failures, 4 data validation or file-format errors. Errors are
printed to stderr as a single ``error: <message>`` line.

All outputs are deterministic given ``--seed`` and independent of
``--threads``; execution details (thread count, wall-clock measurements)
are isolated under the report's ``runtime`` key, the one section exempt
from byte-for-byte reproducibility.
"""

from __future__ import annotations

import argparse
import glob
import json
import sys
import time
from pathlib import Path

import numpy as np
from sklearn.metrics import adjusted_rand_score

from .clusters import ClusterSet, max_intra_cluster_distance
from .dbdpc import DbdpcParams, dbdpc_cluster
from .errors import ParameterError, ValidationError
from .pipeline import ReductionConfig, pact_reduce, select_reduction_layer
from .reference import DpcParams, dpc_cluster, kmeans_cluster
from .rope import RopeConfig
from .synth import generate_scene
from .tensor_io import TokenTensor, read_tensor, write_tensor
from .distance import max_pairwise_distance, pairwise_distance
from .validation import flatten_heads

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _format_report(report: dict, style: str) -> str:
    if style == "json":
        return json.dumps(report, indent=2, default=_json_default) + "\n"
    lines = []

    def walk(prefix: str, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}{k}.", v)
        else:
            if isinstance(value, np.ndarray):
                value = value.tolist()
            lines.append(f"{prefix[:-1]}: {value}")

    walk("", report)
    return "\n".join(lines) + "\n"


def _emit_report(report: dict, out_dir: Path | None, style: str) -> None:
    text = _format_report(report, style)
    sys.stdout.write(text)
    if out_dir is not None:
        suffix = "json" if style == "json" else "txt"
        (out_dir / f"report.{suffix}").write_text(text)


def _positions_tensor(pos: np.ndarray) -> TokenTensor:
    return TokenTensor("position_ids", pos.astype(np.float32))


def _cluster_report_entry(cs: ClusterSet, n: int) -> dict:
    return {
        "centers": [int(c) for c in cs.centers],
        "members": {str(c): cs.members[c] for c in cs.centers},
        "labels": cs.labels(n).tolist(),
        "n_clusters": cs.n_clusters,
    }


# ---------------------------------------------------------------- reduce


def cmd_reduce(args) -> int:
    cfg = ReductionConfig(
        d_c=args.dc,
        lam=getattr(args, "lambda"),
        alpha=args.alpha,
        d_n=args.dn,
        rope=RopeConfig(base=args.rope_base, enabled=not args.no_rope),
        metric=args.metric,
        position_mode=args.position_mode,
        threads=args.threads,
    )
    hidden = read_tensor(args.hidden)
    keys = read_tensor(args.keys)
    queries = read_tensor(args.queries)
    pos_tensor = read_tensor(args.pos)
    pos = pos_tensor.data.astype(np.int64)
    if not np.array_equal(pos_tensor.data, pos):
        raise ValidationError("shape error: position ids must be integers")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = pact_reduce(hidden.data, keys.data, queries.data, pos, cfg)
    algo_time = time.perf_counter() - t0

    write_tensor(result.merged_hidden, out_dir / "merged_hidden.pact")
    write_tensor(_positions_tensor(result.position_ids), out_dir / "position_ids.pact")
    write_tensor(
        TokenTensor("weights", result.weights.astype(np.float32)), out_dir / "weights.pact"
    )
    total_time = time.perf_counter() - t0

    report = {
        "command": "reduce",
        "inputs": {
            "hidden_shape": list(hidden.shape),
            "keys_shape": list(keys.shape),
            "queries_shape": list(queries.shape),
            "n_tokens": hidden.shape[0],
        },
        "config": {
            "d_c": cfg.d_c,
            "lambda": cfg.lam,
            "alpha": cfg.alpha,
            "d_n": cfg.d_n,
            "metric": cfg.metric,
            "rope": {"enabled": cfg.rope.enabled, "base": cfg.rope.base},
            "position_mode": cfg.position_mode,
            "seed": args.seed,
        },
        "n_output_tokens": result.n_tokens,
        "reduction_ratio": result.reduction_ratio,
        "weights": result.weights.tolist(),
        "outputs": {
            "merged_hidden": "merged_hidden.pact",
            "position_ids": "position_ids.pact",
            "weights": "weights.pact",
        },
        "runtime": {
            "threads": cfg.threads,
            "timings": {"algo_s": algo_time, "total_s": total_time},
        },
    }
    _emit_report(report, out_dir, args.report)
    return EXIT_OK


# ---------------------------------------------------------------- cluster


def cmd_cluster(args) -> int:
    tensor = read_tensor(args.vectors)
    vectors = flatten_heads(tensor.data.astype(np.float64))
    metric = "euclidean" if args.points_2d else args.metric
    if args.points_2d and vectors.shape[1] != 2:
        raise ValidationError("shape error: 2-D mode needs (q, 2) points")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    if args.algo == "dbdpc":
        cs = dbdpc_cluster(
            vectors,
            DbdpcParams(
                d_c=args.dc,
                d_n=args.dn,
                metric=metric,
                fallback_threshold=args.fallback_threshold,
            ),
            threads=args.threads,
        )
        params = {"d_c": args.dc, "d_n": args.dn, "metric": metric}
    elif args.algo == "dpc":
        cs = dpc_cluster(
            vectors,
            DpcParams(
                d_c=args.dc,
                threshold=None if args.dpc_top_fraction is not None else args.dpc_threshold,
                top_fraction=args.dpc_top_fraction,
                density=args.density,
                metric=metric,
            ),
            threads=args.threads,
        )
        params = {
            "d_c": args.dc,
            "threshold": args.dpc_threshold,
            "top_fraction": args.dpc_top_fraction,
            "density": args.density,
            "metric": metric,
        }
    else:
        if args.k is None:
            raise ParameterError("kmeans requires --k")
        cs = kmeans_cluster(
            vectors, k=args.k, max_iters=args.max_iters, seed=args.seed, metric=metric
        )
        params = {"k": args.k, "max_iters": args.max_iters, "seed": args.seed, "metric": metric}
    algo_time = time.perf_counter() - t0

    n = vectors.shape[0]
    assignments = {"algo": args.algo, "params": params} | _cluster_report_entry(cs, n)
    (out_dir / "assignments.json").write_text(
        json.dumps(assignments, indent=2, default=_json_default) + "\n"
    )

    if args.points_2d:
        labels = cs.labels(n)
        centers = set(cs.centers)
        rows = ["x,y,cluster,is_center"]
        for i in range(n):
            rows.append(
                f"{tensor.data[i, 0]!r},{tensor.data[i, 1]!r},{labels[i]},{int(i in centers)}"
            )
        (out_dir / "plot.csv").write_text("\n".join(rows) + "\n")

    report = {
        "command": "cluster",
        "inputs": {"shape": list(tensor.shape), "n_tokens": n},
        "algo": args.algo,
        "params": params,
        "n_clusters": cs.n_clusters,
        "outputs": {"assignments": "assignments.json"}
        | ({"plot": "plot.csv"} if args.points_2d else {}),
        "runtime": {"threads": args.threads, "timings": {"algo_s": algo_time}},
    }
    _emit_report(report, out_dir, args.report)
    return EXIT_OK


# ---------------------------------------------------------------- synth


def cmd_synth(args) -> int:
    scene = generate_scene(
        tokens=args.tokens,
        heads=args.heads,
        head_dim=args.head_dim,
        hidden_dim=args.hidden_dim,
        clusters=args.clusters,
        outliers=args.outliers,
        noise=args.noise,
        norm_spread=args.norm_spread,
        seed=args.seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_tensor(TokenTensor("hidden", scene.hidden), out_dir / "hidden.pact")
    write_tensor(TokenTensor("keys", scene.keys), out_dir / "keys.pact")
    write_tensor(TokenTensor("queries", scene.queries), out_dir / "queries.pact")
    write_tensor(_positions_tensor(scene.position_ids), out_dir / "pos.pact")
    labels = {
        "labels": scene.labels.tolist(),
        "n_clusters": scene.n_clusters,
        "n_outliers": scene.n_outliers,
        "outlier_groups": scene.outlier_groups,
    }
    (out_dir / "labels.json").write_text(
        json.dumps(labels, indent=2, default=_json_default) + "\n"
    )
    report = {
        "command": "synth",
        "config": {
            "tokens": args.tokens,
            "heads": args.heads,
            "head_dim": args.head_dim,
            "hidden_dim": args.hidden_dim,
            "clusters": args.clusters,
            "outliers": args.outliers,
            "noise": args.noise,
            "norm_spread": args.norm_spread,
            "seed": args.seed,
        },
        "outputs": {
            "hidden": "hidden.pact",
            "keys": "keys.pact",
            "queries": "queries.pact",
            "pos": "pos.pact",
            "labels": "labels.json",
        },
    }
    _emit_report(report, out_dir, args.report)
    return EXIT_OK


# ---------------------------------------------------------------- layer-select


def cmd_layer_select(args) -> int:
    paths = sorted(glob.glob(args.keys_glob))
    if not paths:
        raise OSError(f"no files matched {args.keys_glob!r}")
    spreads = []
    for path in paths:
        tensor = read_tensor(path)
        flat = flatten_heads(tensor.data.astype(np.float64))
        spreads.append(max_pairwise_distance(flat, threads=args.threads))
    selected = select_reduction_layer(spreads, tau=args.tau)
    report = {
        "command": "layer-select",
        "tau": args.tau,
        "layers": [
            {"layer": i, "file": Path(p).name, "max_key_distance": s}
            for i, (p, s) in enumerate(zip(paths, spreads))
        ],
        "selected_layer": selected,
    }
    _emit_report(report, None, args.report)
    if selected is None:
        sys.stderr.write("no layer meets threshold\n")
        return EXIT_THRESHOLD
    return EXIT_OK


# ---------------------------------------------------------------- compare


def cmd_compare(args) -> int:
    dump = Path(args.dump)
    keys = read_tensor(dump / "keys.pact")
    vectors = flatten_heads(keys.data.astype(np.float64))
    n = vectors.shape[0]
    labels_path = dump / "labels.json" if args.labels is None else Path(args.labels)
    truth = None
    if labels_path.exists():
        truth = json.loads(labels_path.read_text())["labels"]
        if len(truth) != n:
            raise ValidationError("shape error: ground-truth labels do not match tokens")

    dist = pairwise_distance(vectors, metric=args.metric, threads=args.threads)
    algos = ["dbdpc"] + [a.strip() for a in args.against.split(",") if a.strip()]
    entries = []
    timings = []
    dbdpc_clusters = None
    for algo in algos:
        t0 = time.perf_counter()
        if algo == "dbdpc":
            cs = dbdpc_cluster(
                vectors,
                DbdpcParams(d_c=args.dc, d_n=args.dn, metric=args.metric),
                threads=args.threads,
            )
            if dbdpc_clusters is None:
                dbdpc_clusters = cs
        elif algo == "dpc":
            cs = dpc_cluster(
                vectors,
                DpcParams(
                    d_c=args.dc,
                    threshold=args.dpc_threshold,
                    density=args.density,
                    metric=args.metric,
                ),
                threads=args.threads,
            )
        elif algo == "kmeans":
            k = args.k
            if k is None:
                if dbdpc_clusters is None:
                    dbdpc_clusters = dbdpc_cluster(
                        vectors,
                        DbdpcParams(d_c=args.dc, d_n=args.dn, metric=args.metric),
                        threads=args.threads,
                    )
                k = dbdpc_clusters.n_clusters  # match the bounded clusterer's budget
            cs = kmeans_cluster(vectors, k=k, max_iters=args.max_iters, seed=args.seed,
                                metric=args.metric)
        else:
            raise ParameterError(f"unknown algorithm: {algo!r}")
        elapsed = time.perf_counter() - t0
        entry = {
            "name": algo,
            "n_clusters": cs.n_clusters,
            "max_intra_cluster_distance": max_intra_cluster_distance(cs, dist),
            "agreement": (
                float(adjusted_rand_score(truth, cs.labels(n))) if truth is not None else None
            ),
        }
        entries.append(entry)
        timings.append({"name": algo, "algo_s": elapsed})

    report = {
        "command": "compare",
        "inputs": {"keys_shape": list(keys.shape), "n_tokens": n},
        "params": {
            "d_c": args.dc,
            "d_n": args.dn,
            "metric": args.metric,
            "dpc_threshold": args.dpc_threshold,
            "intra_cluster_bound": 2 * args.dc * (2 - args.dc),
        },
        "algorithms": entries,
        "runtime": {"threads": args.threads, "timings": {"per_algorithm": timings}},
    }
    out_dir = None
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    _emit_report(report, out_dir, args.report)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pact",
        description="Visual-token reduction: importance pruning plus bounded clustering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", choices=["json", "text"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("reduce", help="run the full reduction on a tensor dump")
    p.add_argument("--hidden", required=True)
    p.add_argument("--keys", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--dc", type=float, default=0.21)
    p.add_argument("--lambda", type=float, default=0.55)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--dn", type=float, default=2.0)
    p.add_argument("--no-rope", action="store_true")
    p.add_argument("--rope-base", type=float, default=10000.0)
    p.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")
    p.add_argument("--position-mode", choices=["center", "mean"], default="center")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("cluster", help="run one clusterer on a vector file")
    p.add_argument("--algo", choices=["dbdpc", "dpc", "kmeans"], required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--dc", type=float, default=0.21)
    p.add_argument("--dn", type=float, default=2.0)
    p.add_argument("--fallback-threshold", type=int, default=10)
    p.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")
    p.add_argument("--points-2d", action="store_true")
    p.add_argument("--dpc-threshold", type=float, default=0.2)
    p.add_argument("--dpc-top-fraction", type=float, default=None)
    p.add_argument("--density", choices=["gaussian", "cutoff-count"], default="gaussian")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("synth", help="generate a synthetic dump with ground truth")
    p.add_argument("--tokens", type=int, required=True)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--head-dim", type=int, default=8)
    p.add_argument("--hidden-dim", type=int, default=16)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--outliers", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--norm-spread", type=float, default=0.0)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("layer-select", help="pick the earliest layer with enough key spread")
    p.add_argument("--keys-glob", required=True)
    p.add_argument("--tau", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_layer_select)

    p = sub.add_parser("compare", help="compare clusterers on a labeled dump")
    p.add_argument("--dump", required=True)
    p.add_argument("--against", default="dpc,kmeans")
    p.add_argument("--labels", default=None)
    p.add_argument("--dc", type=float, default=0.21)
    p.add_argument("--dn", type=float, default=2.0)
    p.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")
    p.add_argument("--dpc-threshold", type=float, default=0.2)
    p.add_argument("--density", choices=["gaussian", "cutoff-count"], default="gaussian")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", default=None)
    common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ValidationError as exc:  # includes TensorFormatError
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
