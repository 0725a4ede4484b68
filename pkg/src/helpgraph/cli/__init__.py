"""``helpgraph`` command line.

Exit codes: 0 on success, 1 on invalid input or configuration, 2 on I/O
failure. Reports are JSON, matrices CSV with a header row, graphs TSV.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import __version__
from ..experiment import best_run, evaluate_scores, run_repetitions
from ..graph import compress_to_domain_graph
from ..io import (DataFormatError, IdMap, read_edge_list, read_labels, read_matrix_csv,
                  read_user_labels, write_domain_graph, write_edge_list, write_id_map,
                  write_labels, write_matrix_csv, write_rows_csv, write_user_labels)
from ..dataset import LabeledDataset
from ..metrics import aggregate, precision_recall_points
from ..models import HelpModel, MlpModel, NgmModel, PlanetoidModel, embed
from ..nn import checkpoint
from ..study import separation_study, vulnerable_users
from ..synthdata import generate_with_truth, heldout_window
from .config import ConfigError, describe_keys, load_config, synth_config, train_settings

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

DATA_FILES = ("edges.tsv", "domain_features.csv", "user_features.csv", "labels.tsv")

_MODEL_CLASSES = {"help": HelpModel, "mlp": MlpModel, "planetoid": PlanetoidModel, "ngm": NgmModel}


class CliIOError(OSError):
    pass


def _out_dir(path: str) -> Path:
    out = Path(path)
    if not out.is_dir():
        raise CliIOError(f"output directory does not exist: {out}")
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ------------------------------------------------------------------ data I/O


def load_dataset(data_dir: str) -> tuple:
    """Read the four data files; returns (graph, dataset, user ids, domain ids).

    Feature files fix the node sets, so every id in the edge list and labels
    must appear there. A manifest, when present, must agree on node counts.
    """
    d = Path(data_dir)
    for name in DATA_FILES:
        if not (d / name).is_file():
            raise CliIOError(f"missing data file: {d / name}")
    dom_ids, x_d = read_matrix_csv(d / "domain_features.csv")
    user_ids, x_u = read_matrix_csv(d / "user_features.csv")
    manifest = d / "manifest.json"
    if manifest.is_file():
        counts = json.loads(manifest.read_text(encoding="utf-8")).get("counts", {})
        for what, n in (("users", len(user_ids)), ("domains", len(dom_ids))):
            if what in counts and counts[what] != n:
                raise DataFormatError(manifest, None,
                                      f"manifest lists {counts[what]} {what} but features have {n} rows")
    users, domains = IdMap(user_ids), IdMap(dom_ids)
    graph, _, _ = read_edge_list(d / "edges.tsv", users, domains, strict_ids=True)
    labeled, labels, train = read_labels(d / "labels.tsv", domains)
    order = np.argsort(labeled, kind="mergesort")
    data = LabeledDataset(x_d, x_u, labeled[order], labels[order], train[order], ~train[order],
                          domain_ids=list(dom_ids), user_ids=list(user_ids))
    if not train.any():
        raise ValueError("labels.tsv has no training rows")
    if train.all():
        raise ValueError("labels.tsv has no test rows")
    return graph, data, user_ids, dom_ids


def _model_from_checkpoint(path: str):
    kind, payload = checkpoint.load(path)
    if kind not in _MODEL_CLASSES:
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    return kind, _MODEL_CLASSES[kind].from_payload(payload["model"]), payload.get("meta", {})


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    values = load_config(args.config, args.seed)
    cfg = synth_config(values)
    out = _out_dir(args.out)
    graph, data, truth = generate_with_truth(cfg)
    write_edge_list(out / "edges.tsv", graph, data.user_ids, data.domain_ids)
    write_matrix_csv(out / "domain_features.csv", data.domain_ids, data.domain_features)
    write_matrix_csv(out / "user_features.csv", data.user_ids, data.user_features)
    write_labels(out / "labels.tsv", data.domain_ids, data.labeled, data.labels, data.train_mask)
    files = list(DATA_FILES)
    if values["heldout_window"]:
        window = heldout_window(cfg, truth, 1, values["heldout_edge_rate"])
        write_edge_list(out / "heldout_edges.tsv", window, data.user_ids, data.domain_ids)
        with open(out / "domain_classes.tsv", "w", encoding="utf-8") as fh:
            for key, y in zip(data.domain_ids, truth.domain_classes.tolist()):
                fh.write(f"{key}\t{int(y)}\n")
        files += ["heldout_edges.tsv", "domain_classes.tsv"]
    _write_json(out / "manifest.json", {
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "seed": cfg.seed,
        "config": values,
        "counts": {"users": cfg.n_users, "domains": cfg.n_domains, "edges": graph.edge_count,
                   "labeled": cfg.n_labeled},
        "files": files,
    })
    print(f"wrote {len(files)} data files and manifest.json to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    values = load_config(args.config, args.seed)
    settings = train_settings(values)
    out = _out_dir(args.out)
    graph, data, _, _ = load_dataset(args.data)
    report, results = run_repetitions(settings, graph, data, values["seed"],
                                      settings.schedule.repetitions, max(1, values["workers"]))
    _write_json(out / "report.json", json.loads(report.to_json()))
    for r in results:
        single = aggregate([{"run": r.run, "seed": r.seed, "auroc": r.auroc, "auprc": r.auprc}],
                           report.prevalence)
        (out / f"run_{r.run}.json").write_text(single.to_json(), encoding="utf-8")
    _write_json(out / "train_log.json", {"runs": [
        {"run": r.run, "seed": r.seed, **(r.log.to_dict() if r.log else {})} for r in results]})
    if settings.kind != "lp":
        best = best_run(results)
        meta = {"run": best.run, "seed": best.seed, "auprc": best.auprc, "auroc": best.auroc,
                "config": values}
        checkpoint.save(out / "checkpoint.json", settings.kind,
                        {"model": best.model.to_payload(), "meta": meta})
    print(f"{settings.kind}: AUPRC {report.auprc_mean:.4f} +/- {report.auprc_sd:.4f}, "
          f"AUROC {report.auroc_mean:.4f} +/- {report.auroc_sd:.4f} over {report.runs} run(s)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    out = _out_dir(args.out)
    kind, model, _ = _model_from_checkpoint(args.checkpoint)
    _, data, _, dom_ids = load_dataset(args.data)
    width = model.parameters()[0].data.shape[0]
    if data.domain_features.shape[1] != width:
        raise ValueError(f"checkpoint expects {width} domain features, data has "
                         f"{data.domain_features.shape[1]}")
    scores = model.predict(data.domain_features)
    m = evaluate_scores(scores, data)
    report = aggregate([{"run": 0, "auroc": m["auroc"], "auprc": m["auprc"]}],
                       float(data.test_labels.mean()))
    (out / "evaluation.json").write_text(report.to_json(), encoding="utf-8")
    thr, prec, rec = precision_recall_points(scores[data.test_idx], data.test_labels.astype(int))
    _write_json(out / "pr_curve.json", {"threshold": thr.tolist(), "precision": prec.tolist(),
                                        "recall": rec.tolist()})
    write_rows_csv(out / "predictions.csv", ["id", "score"], zip(dom_ids, scores.tolist()))
    print(f"{kind}: test AUPRC {m['auprc']:.4f}, AUROC {m['auroc']:.4f}")
    return EXIT_OK


def cmd_compress(args) -> int:
    out = _out_dir(args.out)
    graph, users, domains = read_edge_list(args.edges)
    dg = compress_to_domain_graph(graph)
    write_domain_graph(out / "domain_graph.tsv", dg, domains.ids)
    write_id_map(out / "domain_ids.tsv", domains.ids)
    write_id_map(out / "user_ids.tsv", users.ids)
    print(f"{dg.edge_count} domain-domain edges from {graph.edge_count} interactions")
    return EXIT_OK


def cmd_export_embeddings(args) -> int:
    out = _out_dir(args.out)
    kind, model, _ = _model_from_checkpoint(args.checkpoint)
    if kind != "help":
        raise ValueError(f"checkpoint kind is {kind!r}; embeddings need a 'help' checkpoint")
    ids, x = read_matrix_csv(args.features)
    tower = model.h_u if args.side == "user" else model.h_d
    if x.shape[1] != tower.input_dim:
        raise ValueError(f"{args.features}: {x.shape[1]} feature columns, the {args.side} tower "
                         f"expects {tower.input_dim}")
    e = embed(model, x, args.side)
    path = out / f"embeddings_{args.side}.csv"
    write_matrix_csv(path, ids, e, prefix="e")
    print(f"wrote {len(ids)} {args.side} embeddings to {path}")
    return EXIT_OK


def cmd_separation_study(args) -> int:
    values = load_config(args.config, args.seed)
    out = _out_dir(args.out)
    ids, x = read_matrix_csv(args.embeddings)
    index = IdMap(ids)
    if args.labels:
        lab = read_user_labels(args.labels)
        missing = [k for k in lab if k not in index]
        if missing:
            raise ValueError(f"{args.labels}: {len(missing)} labeled ids have no embedding, "
                             f"first {missing[0]!r}")
        keys = list(lab)
        rows = np.array([index.get(k) for k in keys], dtype=np.int64)
        y = np.array([lab[k] for k in keys], dtype=np.int64)
    elif args.heldout_edges and args.domain_classes:
        classes = read_user_labels(args.domain_classes)
        domains = IdMap(classes)
        window, _, _ = read_edge_list(args.heldout_edges, IdMap(ids), domains, strict_ids=True)
        rows, y = vulnerable_users(window, np.array([classes[k] for k in domains.ids]),
                                   values["active_threshold"], values["vulnerable_threshold"])
        keys = [ids[i] for i in rows]
        write_user_labels(out / "user_labels.tsv", keys, y)
    else:
        raise ValueError("give --labels, or both --heldout-edges and --domain-classes")
    if y.sum() == 0:
        raise ValueError("no vulnerable users: the separation study needs at least one positive")
    result = separation_study(x[rows], y, values["seed"])
    write_rows_csv(out / "coords.csv", ["id", "x", "y", "label"],
                   ([keys[i], c[0], c[1], int(lbl)] for i, c, lbl in
                    zip(result.rows.tolist(), result.coords.tolist(), result.labels.tolist())))
    _write_json(out / "separation.json", {"score": result.score, "positives": int(result.labels.sum()),
                                          "negatives": int((result.labels == 0).sum())})
    print(f"separation score {result.score:.4f} on {len(result.labels)} users")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helpgraph", description="Train and evaluate graph-regularized domain classifiers.",
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="config keys (key = default):\n" + describe_keys())
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="flat key = value config file")
            sp.add_argument("--seed", type=int, help="overrides the config seed")
        sp.add_argument("--out", required=True, help="existing output directory")
        return sp

    sp = common(sub.add_parser("generate", help="write a synthetic dataset"))
    sp.set_defaults(func=cmd_generate)
    sp = common(sub.add_parser("train", help="train and evaluate repeated runs"))
    sp.add_argument("--data", default=".", help="directory holding the data files")
    sp.set_defaults(func=cmd_train)
    sp = common(sub.add_parser("evaluate", help="score a checkpoint on the test split"), config=False)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--data", default=".", help="directory holding the data files")
    sp.set_defaults(func=cmd_evaluate)
    sp = common(sub.add_parser("compress", help="user-domain edge list to domain graph"), config=False)
    sp.add_argument("--edges", required=True, help="user<TAB>domain<TAB>weight file")
    sp.set_defaults(func=cmd_compress)
    sp = common(sub.add_parser("export-embeddings", help="embed nodes with a HELP checkpoint"),
                config=False)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--features", required=True, help="feature CSV with an id column")
    sp.add_argument("--side", choices=("user", "domain"), default="user")
    sp.set_defaults(func=cmd_export_embeddings)
    sp = common(sub.add_parser("separation-study", help="2-D projection and separation score"))
    sp.add_argument("--embeddings", required=True, help="embedding CSV")
    sp.add_argument("--labels", help="user_id<TAB>0|1 vulnerability labels")
    sp.add_argument("--heldout-edges", help="held-out window edge list (derives labels)")
    sp.add_argument("--domain-classes", help="domain_id<TAB>0|1 classes for the held-out rule")
    sp.set_defaults(func=cmd_separation_study)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
