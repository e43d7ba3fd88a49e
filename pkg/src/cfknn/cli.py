"""Command-line pipelines: generate data, train models, run explainers,
evaluate, ablate, and sweep hyperparameters.

Every command writes its artifacts plus a manifest.json capturing the full
configuration, seeds, and content hashes. Timestamps and wall-times live only
in the manifest so that re-runs reproduce byte-identical CSV/JSON outputs.
"""

from __future__ import annotations

import concurrent.futures
import datetime
import hashlib
import json
import sys
import time
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import click
import numpy as np

from . import __version__, baselines, datasets, metrics
from .graph import Explanation, Graph, GraphError, canonical, load_edgelist, save_edgelist
from .knn import importance as importance_fn
from .knn import knn
from .mcts import ExplainerConfig, explain
from .oracle import best_subgraph_bruteforce
from .sage import (SageModel, TrainConfig, forward, load_model, save_embedding,
                   save_model, train_unsupervised)

MANIFEST_VERSION = "1"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, config: dict,
                   inputs: list[Path], outputs: list[Path],
                   timing: dict | None = None) -> None:
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs if Path(p).exists()},
        "outputs": {str(p): _sha256(Path(p)) for p in outputs if Path(p).exists()},
        "timing": timing or {},
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as f:
        return tomllib.load(f)


def explainer_config(file_cfg: dict, seed: int, **overrides) -> ExplainerConfig:
    section = dict(file_cfg.get("explainer", {}))
    section.update({k: v for k, v in overrides.items() if v is not None})
    section.setdefault("seed", seed)
    return ExplainerConfig(**section)


def save_graph_dir(g: Graph, out_dir: Path, gt=None) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "edges.txt", out_dir / "features.csv"]
    save_edgelist(g, paths[0])
    np.savetxt(paths[1], g.features, delimiter=",")
    if g.labels is not None:
        p = out_dir / "labels.csv"
        with open(p, "w") as f:
            for i, lab in enumerate(g.labels):
                f.write(f"{i},{int(lab)}\n")
        paths.append(p)
    if gt is not None:
        p = out_dir / "ground_truth.txt"
        datasets.save_ground_truth(gt, p)
        paths.append(p)
    return paths


def load_graph_dir(path: str) -> tuple[Graph, "datasets.GroundTruth | None"]:
    d = Path(path)
    if not (d / "edges.txt").exists():
        raise click.ClickException(
            f"{d}/edges.txt not found; run `cfknn generate` first or point "
            "--graph-dir at a directory with edges.txt")
    features = labels = None
    if (d / "features.csv").exists():
        features = np.loadtxt(d / "features.csv", delimiter=",", ndmin=2)
    if (d / "labels.csv").exists():
        raw = np.loadtxt(d / "labels.csv", delimiter=",", dtype=np.int64, ndmin=2)
        labels = np.zeros(raw[:, 0].max() + 1, dtype=np.int64)
        labels[raw[:, 0]] = raw[:, 1]
    g = load_edgelist(d / "edges.txt",
                      num_nodes=features.shape[0] if features is not None else None,
                      features=features, labels=labels)
    gt = None
    if (d / "ground_truth.txt").exists():
        gt = datasets.load_ground_truth(d / "ground_truth.txt")
    return g, gt


def _fmt(x: float) -> str:
    return repr(float(x))


def write_explanations(path: Path, records: list[dict]) -> None:
    with open(path, "w") as f:
        f.write("target,method,importance,size,edges\n")
        for r in sorted(records, key=lambda r: (r["method"], r["target"])):
            edges = ";".join(f"{u}-{v}" for u, v in sorted(r["edges"]))
            f.write(f"{r['target']},{r['method']},{_fmt(r['importance'])},"
                    f"{len(r['edges'])},{edges}\n")


def read_explanations(path) -> list[dict]:
    out = []
    with open(path) as f:
        header = f.readline()
        if not header.startswith("target,"):
            raise click.ClickException(f"{path}: not an explanation file")
        for line in f:
            line = line.strip()
            if not line:
                continue
            target, method, imp, size, edges = line.split(",", 4)
            edge_set = frozenset(
                canonical(*map(int, pair.split("-")))
                for pair in edges.split(";") if pair)
            out.append({"target": int(target), "method": method,
                        "importance": float(imp), "size": int(size),
                        "edges": edge_set})
    return out


def record_to_explanation(rec: dict) -> Explanation:
    nodes = frozenset({rec["target"]}) | {n for e in rec["edges"] for n in e}
    return Explanation(target=rec["target"], nodes=nodes, edges=rec["edges"],
                       importance=rec["importance"])


# ---------------------------------------------------------------------------


@click.group()
@click.version_option(__version__)
def main():
    """Counterfactual subgraph explanations for unsupervised node embeddings."""


@main.command()
@click.argument("dataset", type=click.Choice(sorted(datasets.GENERATORS)))
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--n-motifs", default=None, type=int,
              help="Override the dataset's default motif count.")
@click.option("--base-nodes", default=None, type=int,
              help="BA base size (ba-shapes only).")
@click.option("--depth", default=None, type=int, help="Tree depth (tree-* only).")
@click.option("--feature-dim", default=10, show_default=True)
@click.option("--feature-noise", default=0.1, show_default=True)
def generate(dataset, seed, out_dir, n_motifs, base_nodes, depth, feature_dim,
             feature_noise):
    """Generate a synthetic motif benchmark with ground truth."""
    kwargs = {"feature_dim": feature_dim, "feature_noise": feature_noise}
    if n_motifs is not None:
        kwargs["n_motifs"] = n_motifs
    if base_nodes is not None:
        kwargs["base_nodes"] = base_nodes
    if depth is not None:
        kwargs["depth"] = depth
    g, gt = datasets.GENERATORS[dataset](seed, **kwargs)
    out = Path(out_dir)
    paths = save_graph_dir(g, out, gt)
    write_manifest(out, f"generate {dataset}",
                   {"dataset": dataset, "seed": seed, **kwargs}, [], paths)
    click.echo(f"{dataset}: {g.num_nodes} nodes, {g.num_edges} edges -> {out}")


@main.command()
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--out-model", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=None, type=int)
@click.option("--lr", default=None, type=float)
@click.option("--hidden-dim", default=None, type=int)
@click.option("--num-layers", default=None, type=int)
@click.option("--emb-out", default=None, type=click.Path(),
              help="Also write the trained embedding as CSV.")
def train(graph_dir, out_model, config_path, seed, epochs, lr, hidden_dim,
          num_layers, emb_out):
    """Train the mean-aggregator embedding model on a graph directory."""
    g, _ = load_graph_dir(graph_dir)
    section = dict(load_config_file(config_path).get("train", {}))
    for key, val in (("epochs", epochs), ("lr", lr), ("hidden_dim", hidden_dim),
                     ("num_layers", num_layers)):
        if val is not None:
            section[key] = val
    cfg = TrainConfig(**section)
    t0 = time.perf_counter()
    model = train_unsupervised(g, cfg, seed=seed)
    elapsed = time.perf_counter() - t0
    out = Path(out_model)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    outputs = [out]
    if emb_out:
        save_embedding(forward(model, g), emb_out)
        outputs.append(Path(emb_out))
    write_manifest(out.parent, "train",
                   {"seed": seed, **cfg.__dict__},
                   [Path(graph_dir) / "edges.txt"], outputs,
                   {"train_seconds": elapsed})
    click.echo(f"trained {cfg.num_layers}-layer model -> {out}")


def _parse_targets(targets, g, gt, sample, seed):
    if targets:
        return [int(t) for t in targets.split(",")]
    if gt is not None:
        picked = gt.motif_targets()
    else:
        picked = list(range(g.num_nodes))
    if sample and sample < len(picked):
        rng = np.random.default_rng(seed)
        picked = sorted(rng.choice(picked, size=sample, replace=False).tolist())
    return picked


METHODS = ("full", "no-restart", "mcts", "mcts-avg", "subgraphx-all",
           "subgraphx-sample", "prx-degree", "prx-common", "prx-cosine",
           "onehop2", "onehop3", "knn-graph", "rw", "rw-restart")


def run_method(method: str, model, g, v: int, cfg: ExplainerConfig,
               rw_size: int = 3):
    rng = np.random.default_rng(cfg.seed)
    if method in baselines.VARIANTS or method in baselines.ALIASES:
        res = baselines.ablation_variant(method, model, g, v, cfg)
        return res.explanation
    if method == "onehop2":
        expl = baselines.onehop_2n(g, v, rng)
    elif method == "onehop3":
        expl = baselines.onehop_3n(g, v, rng)
    elif method == "knn-graph":
        expl = baselines.knn_graph(g, forward(model, g), v, k=cfg.k)
    elif method == "rw":
        expl = baselines.rw_subgraph(g, v, rw_size, rng, p_restart=0.0)
    elif method == "rw-restart":
        expl = baselines.rw_subgraph(g, v, rw_size, rng,
                                     p_restart=cfg.p_restart)
    else:
        raise click.ClickException(f"unknown method {method!r}")
    expl.importance = importance_fn(model, g, expl, v, cfg.k)
    return expl


def _explain_one(args):
    method, model, g, v, cfg, rw_size = args
    t0 = time.perf_counter()
    expl = run_method(method, model, g, v, cfg, rw_size)
    return v, expl, time.perf_counter() - t0


@main.command("explain")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--method", default="full", show_default=True,
              type=click.Choice(METHODS))
@click.option("--targets", default=None,
              help="Comma-separated node ids; default all motif nodes "
                   "(synthetic) or a seeded sample (real graphs).")
@click.option("--sample", default=None, type=int,
              help="Seeded sample size when --targets is omitted.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--rw-size", default=3, show_default=True,
              help="Edge budget for the random-walk baselines.")
@click.option("--out", required=True, type=click.Path())
def explain_cmd(model_path, graph_dir, method, targets, sample, config_path,
                seed, workers, rw_size, out):
    """Explain a set of target nodes with one method."""
    g, gt = load_graph_dir(graph_dir)
    model = load_model(model_path)
    file_cfg = load_config_file(config_path)
    picked = _parse_targets(targets, g, gt, sample, seed)
    jobs = []
    for v in picked:
        cfg = explainer_config(file_cfg, seed=seed + v)
        jobs.append((method, model, g, v, cfg, rw_size))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_explain_one, jobs))
    else:
        results = [_explain_one(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    records = [{"target": v, "method": method,
                "importance": expl.importance or 0.0, "edges": expl.edges}
               for v, expl, _ in results]
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_explanations(out, records)
    timing = {str(v): dt for v, _, dt in results}
    write_manifest(out.parent, f"explain {method}",
                   {"method": method, "seed": seed, "targets": picked,
                    "explainer": explainer_config(file_cfg, seed=seed).__dict__},
                   [Path(model_path), Path(graph_dir) / "edges.txt"], [out],
                   {"per_target_seconds": timing,
                    "total_seconds": sum(timing.values())})
    mean_imp = float(np.mean([r["importance"] for r in records])) if records else 0.0
    click.echo(f"{method}: {len(records)} targets, mean importance {mean_imp:.3f}")


@main.command()
@click.option("--explanations", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--gt/--no-gt", default=True, show_default=True,
              help="Score precision/recall against the ground-truth file.")
@click.option("--pn/--no-pn", default=False, show_default=True,
              help="Also compute Hit@5 probability of necessity (slower).")
@click.option("--homogeneity/--no-homogeneity", default=False, show_default=True)
@click.option("--n-clusters", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def evaluate(explanations, graph_dir, model_path, gt, pn, homogeneity,
             n_clusters, seed, out_dir):
    """Score an explanation file; emit per-node CSV and aggregate JSON."""
    g, ground = load_graph_dir(graph_dir)
    model = load_model(model_path)
    records = read_explanations(explanations)
    report = metrics.MetricsReport(config_snapshot={
        "seed": seed, "pn": pn, "homogeneity": homogeneity})
    if n_clusters is None:
        n_clusters = int(g.labels.max()) + 1 if g.labels is not None else 5
    test_edges = None
    if pn:
        _, test_edges = metrics.split_edges(g, 0.1, seed=seed)
    for rec in records:
        expl = record_to_explanation(rec)
        row = {"target": rec["target"], "method": rec["method"],
               "importance": rec["importance"], "size": rec["size"]}
        if gt and ground is not None and ground.in_motif(rec["target"]):
            prc, rcl = metrics.precision_recall(expl, ground)
            row["precision"], row["recall"] = prc, rcl
        row["valid"] = 1.0 if rec["importance"] == 1.0 else 0.0
        if homogeneity:
            row["homogeneity"] = metrics.homogeneity_after_perturb(
                model, g, expl, rec["target"], n_clusters, seed=seed)
        report.per_node.append(row)
    agg = report.aggregates()
    if pn and test_edges is not None:
        for method in agg:
            expls = [record_to_explanation(r) for r in records
                     if r["method"] == method]
            agg[method]["pn_hit_at_5"] = metrics.pn_hit_at_k(
                model, g, expls, test_edges, k=5)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_node_path = out / "per_node.csv"
    cols = sorted({k for r in report.per_node for k in r})
    cols = ["target", "method"] + [c for c in cols if c not in ("target", "method")]
    with open(per_node_path, "w") as f:
        f.write(",".join(cols) + "\n")
        for r in sorted(report.per_node, key=lambda r: (r["method"], r["target"])):
            f.write(",".join(
                "" if c not in r else
                (str(r[c]) if c in ("target", "method") else _fmt(r[c]))
                for c in cols) + "\n")
    agg_path = out / "aggregates.json"
    with open(agg_path, "w") as f:
        json.dump({"aggregates": agg, "config": report.config_snapshot},
                  f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(out, "evaluate", report.config_snapshot,
                   [Path(explanations)], [per_node_path, agg_path])
    for method, a in agg.items():
        click.echo(f"{method}: " + ", ".join(
            f"{k}={v:.3f}" if isinstance(v, float) else f"{k}={v}"
            for k, v in sorted(a.items())))


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--variants", default="all",
              help="Comma-separated variant names, or 'all'.")
@click.option("--targets", default=None)
@click.option("--sample", default=20, show_default=True, type=int)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def ablate(model_path, graph_dir, variants, targets, sample, config_path, seed,
           out):
    """Run the ablation matrix; summary CSV has importance/size per variant
    (wall-times go to the manifest)."""
    g, gt = load_graph_dir(graph_dir)
    model = load_model(model_path)
    file_cfg = load_config_file(config_path)
    names = (sorted(baselines.VARIANTS) if variants == "all"
             else [v.strip() for v in variants.split(",")])
    picked = _parse_targets(targets, g, gt, sample, seed)
    rows = []
    timing = {}
    for name in names:
        imps, sizes = [], []
        t0 = time.perf_counter()
        for v in picked:
            cfg = explainer_config(file_cfg, seed=seed + v)
            res = baselines.ablation_variant(name, model, g, v, cfg)
            imps.append(res.explanation.importance or 0.0)
            sizes.append(res.explanation.size)
        timing[name] = (time.perf_counter() - t0) / max(len(picked), 1)
        rows.append((name, float(np.mean(imps)), float(np.mean(sizes))))
        click.echo(f"{name}: impt {rows[-1][1]:.3f}, size {rows[-1][2]:.2f}, "
                   f"time/target {timing[name]:.2f}s")
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        f.write("variant,importance,size\n")
        for name, imp, size in rows:
            f.write(f"{name},{_fmt(imp)},{_fmt(size)}\n")
    write_manifest(out.parent, "ablate",
                   {"variants": names, "seed": seed, "targets": picked},
                   [Path(model_path)], [out],
                   {"seconds_per_target": timing})


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--axis", required=True, type=click.Choice(["k", "p_restart", "lam"]))
@click.option("--values", required=True, help="Comma-separated values.")
@click.option("--targets", default=None)
@click.option("--sample", default=20, show_default=True, type=int)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def sweep(model_path, graph_dir, axis, values, targets, sample, config_path,
          seed, out):
    """Sensitivity sweep: mean importance per hyperparameter value."""
    g, gt = load_graph_dir(graph_dir)
    model = load_model(model_path)
    file_cfg = load_config_file(config_path)
    vals = [float(v) for v in values.split(",")]
    picked = _parse_targets(targets, g, gt, sample, seed)
    base = explainer_config(file_cfg, seed=seed)
    curve = metrics.sensitivity_sweep(model, g, picked, axis, vals,
                                      base_cfg=base, seed=seed)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        f.write(f"{axis},mean_importance\n")
        for val, imp in curve:
            f.write(f"{_fmt(val)},{_fmt(imp)}\n")
    write_manifest(out.parent, f"sweep {axis}",
                   {"axis": axis, "values": vals, "seed": seed,
                    "targets": picked}, [Path(model_path)], [out])
    for val, imp in curve:
        click.echo(f"{axis}={val}: mean importance {imp:.3f}")


@main.command("importance")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--target", required=True, type=int)
@click.option("--edges", required=True,
              help="Semicolon-separated edge list, e.g. '0-1;1-2'.")
@click.option("--k", default=5, show_default=True)
def importance_cmd(model_path, graph_dir, target, edges, k):
    """Score one explanation (edge list) for one target."""
    g, _ = load_graph_dir(graph_dir)
    model = load_model(model_path)
    edge_set = frozenset(canonical(*map(int, pair.split("-")))
                         for pair in edges.split(";") if pair)
    nodes = frozenset({target}) | {n for e in edge_set for n in e}
    try:
        expl = Explanation(target=target, nodes=nodes, edges=edge_set)
        val = importance_fn(model, g, expl, target, k)
    except (GraphError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"importance = {val!r}")


@main.command("oracle")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--graph-dir", required=True, type=click.Path(exists=True))
@click.option("--targets", required=True)
@click.option("--max-edges", default=3, show_default=True)
@click.option("--k", default=5, show_default=True)
@click.option("--out", required=True, type=click.Path())
def oracle_cmd(model_path, graph_dir, targets, max_edges, k, out):
    """Brute-force optimum per target (desk-scale graphs only)."""
    g, _ = load_graph_dir(graph_dir)
    model = load_model(model_path)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        f.write("target,importance,size,edges\n")
        for tok in targets.split(","):
            v = int(tok)
            expl, imp = best_subgraph_bruteforce(model, g, v, k, max_edges)
            edges = ";".join(f"{a}-{b}" for a, b in sorted(expl.edges))
            f.write(f"{v},{_fmt(imp)},{expl.size},{edges}\n")
    write_manifest(out.parent, "oracle",
                   {"targets": targets, "max_edges": max_edges, "k": k},
                   [Path(model_path)], [out])
    click.echo(f"oracle table -> {out}")


if __name__ == "__main__":
    sys.exit(main())
