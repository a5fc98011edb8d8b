"""Batch command-line pipeline.

Subcommands: extract, floor, synth, train, eval, sweep, explain, kinplot.
Every run writes a manifest.json into the output directory recording the
resolved configuration, input hashes and seed, so runs are reproducible.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

import argparse
import configparser
import csv
import hashlib
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .charts import svg_line_chart
from .errors import LmaError
from .explain import (
    permutation_importance,
    summary_rank,
    tree_shap,
    write_explanations_csv,
    write_summary_csv,
)
from .features import (
    FEATURE_NAMES,
    LmaConfig,
    SequencePrimitives,
    assemble_features,
    read_features_csv,
    write_features_csv,
)
from .floor import fit_floor, flat_floor
from .forest import (
    Dataset,
    ForestModel,
    ForestParams,
    cross_val_accuracy,
    grid_search,
    metrics,
    predict,
    stratified_group_kfold,
    train,
)
from .kinematics import WindowConfig
from .sequence import load_sequence, save_sequence, validate_and_repair
from .synth import default_styles, generate_corpus


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_cloud(path):
    """Point cloud file: one 'x y z' triple per line, meters."""
    pts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise LmaError(f"{path}:{lineno}: expected 'x y z'")
            pts.append([float(v) for v in parts])
    return np.array(pts)


def _write_manifest(out_dir, command, config, inputs, seed, notes=None):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": seed,
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if notes:
        manifest["notes"] = notes
    path = Path(out_dir) / "manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_config_file(path):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise LmaError(f"cannot read config file {path}")
    out = {}
    for section in cp.sections():
        for key, value in cp[section].items():
            out[f"{section}.{key}"] = value
    return out


def _resolved(args, file_cfg, key, cast, default):
    """CLI flag > config file > default."""
    flag = getattr(args, key.split(".")[-1].replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in file_cfg:
        raw = file_cfg[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes")
        if raw.lower() == "none":
            return None
        return cast(raw)
    return default


def _lma_config(args, file_cfg):
    w = _resolved(args, file_cfg, "window.w", int, 55)
    stride = _resolved(args, file_cfg, "window.stride", int, 1)
    scale = _resolved(args, file_cfg, "lma.initiation_scale", float, 1.0)
    eps = _resolved(args, file_cfg, "lma.epsilon_net", float, 1e-3)
    return LmaConfig(
        window=WindowConfig(w=w, stride=stride),
        initiation_scale=scale,
        epsilon_net=eps,
    )


def _int_or_none(v):
    return None if str(v).lower() == "none" else int(v)


def _int_list(v):
    return [_int_or_none(tok) for tok in str(v).split(",") if tok != ""]


def _load_sequences(paths, max_gap=6):
    seqs = []
    for p in paths:
        try:
            seqs.append(validate_and_repair(load_sequence(p), max_gap=max_gap))
        except LmaError as e:
            raise LmaError(f"{p}: {e}") from e
    return seqs


def _floor_for(args, notes):
    if getattr(args, "cloud", None):
        cloud = _load_cloud(args.cloud)
        plane = fit_floor(cloud, tau=args.tau)
        notes["floor"] = "fitted-from-cloud"
        return plane
    notes["floor"] = "assumed-flat"
    return flat_floor()


def cmd_extract(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _lma_config(args, file_cfg)
    notes = {}
    plane = _floor_for(args, notes)
    rows = []
    for seq in _load_sequences(args.sequences):
        rows.extend(assemble_features(seq, plane=plane, cfg=cfg))
    write_features_csv(rows, out / "features.csv")
    config = {
        "window": {"w": cfg.window.w, "stride": cfg.window.stride},
        "lma": {"initiation_scale": cfg.initiation_scale, "epsilon_net": cfg.epsilon_net},
        "tau": args.tau,
    }
    inputs = list(args.sequences) + ([args.cloud] if args.cloud else [])
    _write_manifest(out, "extract", config, inputs, args.seed, notes)
    print(f"wrote {len(rows)} feature rows to {out / 'features.csv'}")
    return 0


def cmd_floor(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cloud = _load_cloud(args.cloud)
    plane = fit_floor(cloud, tau=args.tau, up_axis=args.up_axis, depth_axis=args.depth_axis)
    payload = {
        "slope": plane.slope,
        "intercept": plane.intercept,
        "up_axis": plane.up_axis,
        "depth_axis": plane.depth_axis,
        "tau": plane.tau,
        "pinball_loss": plane.pinball_loss,
    }
    with open(out / "floor.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "floor", {"tau": args.tau}, [args.cloud], args.seed)
    print(f"floor: h = {plane.slope:.6g} * d + {plane.intercept:.6g} (loss {plane.pinball_loss:.6g})")
    return 0


def cmd_synth(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = default_styles(noise_sigma=args.noise)
    seqs = generate_corpus(
        specs, per_style=args.per_style, duration=args.duration, fps=args.fps, master_seed=args.seed
    )
    for seq in seqs:
        save_sequence(seq, out / f"{seq.group_id}.jsonl")
    _write_manifest(
        out,
        "synth",
        {
            "per_style": args.per_style,
            "duration": args.duration,
            "fps": args.fps,
            "noise": args.noise,
        },
        [],
        args.seed,
    )
    print(f"wrote {len(seqs)} sequences to {out}")
    return 0


def _dataset_from_csv(path):
    X, labels, groups, _ = read_features_csv(path)
    if any(l is None for l in labels):
        raise LmaError("feature CSV lacks labels; cannot train/evaluate")
    return Dataset.from_labels(X, labels, groups, FEATURE_NAMES)


def _forest_grid(args, file_cfg):
    trees = args.n_trees if args.n_trees else [50, 100, 200]
    depths = args.max_depth if args.max_depth else [8, 12, None]
    leaves = args.min_samples_leaf if args.min_samples_leaf else [1, 5]
    return {
        "n_trees": trees,
        "max_depth": depths,
        "min_samples_leaf": leaves,
        "features_per_split": [int(file_cfg.get("forest.features_per_split", 8))],
        "bootstrap": [file_cfg.get("forest.bootstrap", "true").lower() in ("1", "true", "yes")],
        "seed": [args.seed],
    }


def _report_table(rep, class_names):
    lines = [f"{'Style':24s} {'Prec.(%)':>9s} {'Rec.(%)':>9s} {'F1(%)':>9s}"]
    for name in class_names:
        m = rep["per_class"][name]
        lines.append(
            f"{name:24s} {100 * m['precision']:9.2f} {100 * m['recall']:9.2f} {100 * m['f1']:9.2f}"
        )
    mac = rep["macro"]
    lines.append(
        f"{'Average':24s} {100 * mac['precision']:9.2f} {100 * mac['recall']:9.2f} {100 * mac['f1']:9.2f}"
    )
    return "\n".join(lines)


def _write_metrics_csv(rep, class_names, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class", "precision", "recall", "f1", "support", "zero_division"])
        for name in class_names:
            m = rep["per_class"][name]
            writer.writerow(
                [name, f"{m['precision']:.9g}", f"{m['recall']:.9g}", f"{m['f1']:.9g}",
                 m["support"], int(m["zero_division"])]
            )
        mac = rep["macro"]
        writer.writerow(["macro", f"{mac['precision']:.9g}", f"{mac['recall']:.9g}",
                         f"{mac['f1']:.9g}", len(class_names and []) or "", ""])


def _vote_by_group(y_true, y_pred, groups):
    """Majority vote per group; returns group-level truth/prediction arrays."""
    uniq = sorted(set(groups))
    gt, gp = [], []
    for g in uniq:
        idx = [i for i, gg in enumerate(groups) if gg == g]
        gt.append(int(np.bincount([y_true[i] for i in idx]).argmax()))
        gp.append(int(np.bincount([y_pred[i] for i in idx]).argmax()))
    return np.array(gt), np.array(gp)


def cmd_train(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = _dataset_from_csv(args.features)
    grid = _forest_grid(args, file_cfg)
    best, report = grid_search(data, grid, k=args.k, seed=args.seed, n_threads=args.threads)

    with open(out / "cv_report.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n_trees", "max_depth", "min_samples_leaf", "mean_accuracy", "fold_accuracies"])
        for r in report:
            p = r["params"]
            writer.writerow(
                [p.n_trees, p.max_depth, p.min_samples_leaf,
                 f"{r['mean_accuracy']:.9g}",
                 ";".join(f"{a:.9g}" for a in r["fold_accuracies"])]
            )

    # pooled out-of-fold predictions give the per-class report
    folds = stratified_group_kfold(data.y, data.groups, k=args.k, seed=args.seed)
    y_true, y_pred, grp = [], [], []
    for tr, te in folds:
        sub = Dataset(data.X[tr], data.y[tr], tuple(data.groups[i] for i in tr),
                      data.feature_names, data.class_names)
        model = train(sub, best, n_threads=args.threads)
        pred = predict(model, data.X[te])
        y_true.extend(data.y[te].tolist())
        y_pred.extend(pred.tolist())
        grp.extend(data.groups[i] for i in te)
    if args.vote:
        yt, yp = _vote_by_group(y_true, y_pred, grp)
    else:
        yt, yp = np.array(y_true), np.array(y_pred)
    rep = metrics(yt, yp, data.class_names)
    print(_report_table(rep, data.class_names))
    _write_metrics_csv(rep, data.class_names, out / "metrics.csv")

    final = train(data, best, n_threads=args.threads)
    final.save(out / "model.json")
    config = {"grid": {k: [str(v) for v in vals] for k, vals in grid.items()},
              "best": {"n_trees": best.n_trees, "max_depth": best.max_depth,
                       "min_samples_leaf": best.min_samples_leaf}, "k": args.k,
              "vote": bool(args.vote)}
    _write_manifest(out, "train", config, [args.features], args.seed)
    print(f"best params: n_trees={best.n_trees} max_depth={best.max_depth} "
          f"min_samples_leaf={best.min_samples_leaf}")
    return 0


def cmd_eval(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = ForestModel.load(args.model)
    X, labels, groups, _ = read_features_csv(args.features)
    if any(l is None for l in labels):
        raise LmaError("feature CSV lacks labels; cannot evaluate")
    code = {c: i for i, c in enumerate(model.class_names)}
    unknown = sorted({l for l in labels if l not in code})
    if unknown:
        raise LmaError(f"labels not in model classes: {unknown}")
    y_true = np.array([code[l] for l in labels])
    y_pred = predict(model, X)
    if args.vote:
        y_true, y_pred = _vote_by_group(y_true.tolist(), y_pred.tolist(), groups)
    rep = metrics(y_true, y_pred, model.class_names)
    print(_report_table(rep, model.class_names))
    _write_metrics_csv(rep, model.class_names, out / "metrics.csv")
    _write_manifest(out, "eval", {"vote": bool(args.vote)}, [args.model, args.features], args.seed)
    return 0


def cmd_sweep(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seqs = _load_sequences(args.sequences)
    notes = {}
    plane = _floor_for(args, notes)
    min_T = min(s.n_frames for s in seqs)
    sizes = args.sizes
    for w in sizes:
        if w > min_T:
            raise LmaError(f"window {w} exceeds shortest sequence ({min_T} frames)")
    prims = [SequencePrimitives(s) for s in seqs]
    params = ForestParams(
        n_trees=args.n_trees[0] if args.n_trees else 30,
        max_depth=args.max_depth[0] if args.max_depth else 12,
        min_samples_leaf=args.min_samples_leaf[0] if args.min_samples_leaf else 1,
        seed=args.seed,
    )
    results = []
    for w in sizes:
        cfg = LmaConfig(window=WindowConfig(w=w, stride=args.stride))
        rows = []
        for seq, prim in zip(seqs, prims):
            rows.extend(assemble_features(seq, plane=plane, cfg=cfg, primitives=prim))
        X = np.stack([r.values for r in rows])
        labels = [r.label for r in rows]
        groups = [r.group_id for r in rows]
        data = Dataset.from_labels(X, labels, groups, FEATURE_NAMES)
        accs = cross_val_accuracy(data, params, k=args.k, seed=args.seed, n_threads=args.threads)
        results.append((w, float(np.mean(accs)), float(np.std(accs))))
        print(f"w={w}: accuracy {np.mean(accs):.4f} +/- {np.std(accs):.4f}")
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["w", "mean_accuracy", "std_accuracy"])
        for w, m, s in results:
            writer.writerow([w, f"{m:.9g}", f"{s:.9g}"])
    svg_line_chart(
        [("accuracy", [r[0] for r in results], [r[1] for r in results])],
        out / "sweep.svg",
        xlabel="window size (frames)",
        ylabel="CV accuracy",
        title="Accuracy vs sliding-window size",
    )
    _write_manifest(out, "sweep", {"sizes": sizes, "stride": args.stride, "k": args.k},
                    args.sequences, args.seed, notes)
    return 0


def cmd_explain(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = ForestModel.load(args.model)
    X, labels, groups, _ = read_features_csv(args.features)
    if tuple(model.feature_names) != FEATURE_NAMES:
        raise LmaError("model feature schema does not match the canonical layout")
    explanations = [tree_shap(model, x) for x in X]
    write_explanations_csv(explanations, out / "explanations.csv")
    ranking = summary_rank(explanations)
    write_summary_csv(ranking[: args.top_k], out / "summary.csv")
    # per-class summaries
    with open(out / "summary_per_class.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class", "feature", "mean_abs_phi", "rank"])
        stacked = np.stack([np.abs(e.phi) for e in explanations])  # (N, C, F)
        for c, cname in enumerate(model.class_names):
            mean_abs = stacked[:, c, :].mean(axis=0)
            order = np.lexsort((np.arange(len(FEATURE_NAMES)), -mean_abs))[: args.top_k]
            for rank, f in enumerate(order, start=1):
                writer.writerow([cname, FEATURE_NAMES[f], f"{mean_abs[f]:.9g}", rank])
    _write_manifest(out, "explain", {"top_k": args.top_k}, [args.model, args.features], args.seed)
    print(f"top {args.top_k} features:")
    for _, name, value in ranking[: args.top_k]:
        print(f"  {name:28s} {value:.6g}")
    return 0


def cmd_kinplot(args, file_cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seq = _load_sequences([args.sequence])[0]
    cfg = _lma_config(args, file_cfg)
    w = cfg.window.w
    if seq.n_frames < w:
        raise LmaError(f"sequence shorter than window ({seq.n_frames} < {w})")
    prim = SequencePrimitives(seq)
    skel = seq.skeleton
    sel = [skel.index(r) for r in LmaConfig().selected_joints]
    mean_speed = prim.speed[:, sel].mean(axis=1)
    kernel = np.ones(w) / w
    curve = np.convolve(mean_speed, kernel, mode="valid")
    frames = np.arange(len(curve))
    with open(out / "kinematics.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame", "velocity"])
        for f, v in zip(frames, curve):
            writer.writerow([int(f), f"{v:.9g}"])
    svg_line_chart(
        [(seq.label or "sequence", frames.tolist(), curve.tolist())],
        out / "kinematics.svg",
        xlabel="frame number",
        ylabel="velocity (m/s)",
        title=f"Windowed mean speed (w={w})",
    )
    _write_manifest(out, "kinplot", {"w": w}, [args.sequence], args.seed)
    return 0


def _build_parser():
    parser = _Parser(prog="lmakit", description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default="out")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="sequences -> feature CSV")
    p.add_argument("sequences", nargs="+")
    p.add_argument("--cloud", default=None, help="point cloud file (x y z per line)")
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--w", dest="w", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("floor", help="fit the floor plane from a point cloud")
    p.add_argument("cloud")
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--up-axis", type=int, default=1)
    p.add_argument("--depth-axis", type=int, default=2)
    p.set_defaults(func=cmd_floor)

    p = sub.add_parser("synth", help="generate the synthetic 10-style corpus")
    p.add_argument("--per-style", type=int, default=6)
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--fps", type=float, default=60.0)
    p.add_argument("--noise", type=float, default=0.005)
    p.set_defaults(func=cmd_synth)

    for name in ("train", "eval"):
        p = sub.add_parser(name, help=f"{name} a forest on a feature CSV")
        if name == "train":
            p.add_argument("features")
            p.add_argument("--n-trees", type=_int_list, default=None)
            p.add_argument("--max-depth", type=_int_list, default=None)
            p.add_argument("--min-samples-leaf", type=_int_list, default=None)
            p.add_argument("--k", type=int, default=3)
            p.add_argument("--vote", action="store_true", help="per-video majority vote")
            p.set_defaults(func=cmd_train)
        else:
            p.add_argument("model")
            p.add_argument("features")
            p.add_argument("--vote", action="store_true")
            p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="accuracy vs window size")
    p.add_argument("sequences", nargs="+")
    p.add_argument("--sizes", type=_int_list, default=[5, 15, 30, 55])
    p.add_argument("--stride", type=int, default=5)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--cloud", default=None)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--n-trees", type=_int_list, default=None)
    p.add_argument("--max-depth", type=_int_list, default=None)
    p.add_argument("--min-samples-leaf", type=_int_list, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("explain", help="Shapley attributions for a feature CSV")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("kinplot", help="windowed mean-speed curve")
    p.add_argument("sequence")
    p.add_argument("--w", dest="w", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.set_defaults(func=cmd_kinplot)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        file_cfg = _read_config_file(args.config) if args.config else {}
        return args.func(args, file_cfg)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except LmaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
