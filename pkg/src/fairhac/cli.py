"""Command-line entry point: ``fairhac {cluster,fix,tune,eval,compare}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from .core import Dendrogram, FairHACError, cut
from .fhac import MODES, SCHEDULE_KINDS, fhac
from .fphac import fp_hac
from .hac import vanilla_hac
from .ingest import CONFIG_DIR, DatasetConfig, IngestError, load_csv, standardize, subsample
from .linkage import CRITERIA, pairwise_distances
from .metrics import FairnessReport, fairness_report
from .plots import bar_chart_svg
from .tuning import TuningGrid, grid_search, schedules_for

log = logging.getLogger("fairhac")


class UsageError(FairHACError):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python numbers."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_clean(payload), indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _threads() -> int:
    raw = os.environ.get("FAIRHAC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"FAIRHAC_THREADS must be an integer, got {raw!r}") from None


def _load(args):
    """Resolve ``--config`` (a path or a bundled name) and materialize the dataset."""
    name = args.config
    path = Path(name)
    if not path.exists():
        path = CONFIG_DIR / f"{name}.json"
        if not path.exists():
            raise UsageError(f"config {name!r} is neither a file nor a bundled config")
    cfg = DatasetConfig.load(path)
    dataset, groups = load_csv(cfg.path, cfg.features, cfg.sensitive)
    target = args.target_n if args.target_n is not None else cfg.target_n
    seed = args.seed if args.seed is not None else cfg.seed
    if target is not None and target < dataset.n:
        dataset, groups, used = subsample(dataset, groups, target, seed)
        if used != seed:
            log.warning("seed %d emptied a group; used seed %d", seed, used)
    if cfg.standardize:
        dataset = standardize(dataset)
    k = args.k if args.k is not None else cfg.k
    return cfg, dataset, groups, k


def _report(rep: FairnessReport, groups) -> dict:
    out = rep.to_dict()
    out["ideal"] = groups.ideal.tolist()
    out["group_names"] = list(groups.group_names)
    return out


def _assignment_csv(clustering, ids) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "cluster"])
    for pid, c in zip(ids, clustering.assignment.tolist()):
        w.writerow([pid, c])
    return buf.getvalue()


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_tree(out: Path, stem: str, tree: Dendrogram) -> None:
    (out / f"{stem}.json").write_text(tree.to_json() + "\n", encoding="utf-8")
    if tree.complete:
        (out / f"{stem}.nwk").write_text(tree.to_newick() + "\n", encoding="utf-8")


def _read_tree(path) -> Dendrogram:
    try:
        return Dendrogram.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read tree {path}: {exc}") from exc


def _check_tree(tree: Dendrogram, n: int) -> None:
    if tree.n_leaves != n:
        raise UsageError(f"tree has {tree.n_leaves} leaves but the dataset has {n} points")


def cmd_cluster(args) -> int:
    cfg, dataset, groups, k = _load(args)
    base = pairwise_distances(dataset.points)
    if args.algorithm == "vanilla":
        tree = vanilla_hac(dataset, args.criterion, base=base)
        report = fairness_report(cut(tree, k), groups, base)
        extra = {}
    else:
        config = {"schedule": args.schedule, "theta1": args.theta1, "theta2": args.theta2,
                  "alpha0": args.alpha0, "beta0": args.beta0}
        za, zb = schedules_for(config)
        res = fhac(dataset, groups, k, args.criterion, za, zb, args.mode, not args.stop_at_k, base=base)
        tree, report = res.tree, res.report
        extra = {"all_constraints_met": res.all_constraints_met, "params": {**config, "mode": args.mode}}
    out = _out_dir(args)
    _write_tree(out, "tree", tree)
    _write_json(out / "report.json", {"dataset": cfg.name, "algorithm": args.algorithm, "criterion": args.criterion,
                                      "k": k, "report": _report(report, groups), **extra})
    (out / "assignment.csv").write_text(_assignment_csv(cut(tree, k), dataset.ids), encoding="utf-8")
    print(f"{args.algorithm} {args.criterion}: mfc={report.mfc:.4f} balance={report.balance:.4f}")
    return 0


def cmd_fix(args) -> int:
    cfg, dataset, groups, k = _load(args)
    tree = _read_tree(args.tree)
    _check_tree(tree, dataset.n)
    res = fp_hac(tree, k, groups, args.epsilon, args.criterion, args.objective,
                 dataset=dataset, paper_literal=args.mode == "paper-literal")
    out = _out_dir(args)
    _write_tree(out, "tree_fixed", res.tree)
    before, after = res.before, res.report
    diff = {
        "mfc": after.mfc - before.mfc,
        "balance": after.balance - before.balance,
        "silhouette": None if before.silhouette is None else after.silhouette - before.silhouette,
    }
    _write_json(out / "fix_report.json", {
        "dataset": cfg.name, "criterion": args.criterion, "k": k, "epsilon": args.epsilon,
        "objective": args.objective, "before": _report(before, groups), "after": _report(after, groups),
        "diff": diff, "swaps": [{"level": lv, "x": x, "y": y} for lv, x, y in res.swaps],
    })
    print(f"fp-hac: mfc {before.mfc:.4f} -> {after.mfc:.4f}, balance {before.balance:.4f} -> {after.balance:.4f}, "
          f"{len(res.swaps)} swaps")
    return 0


def _grid(args) -> TuningGrid:
    kwargs = {}
    for name in ("theta1", "theta2", "alpha0", "beta0", "epsilon"):
        vals = getattr(args, name, None)
        if vals:
            kwargs[f"{name}_values"] = tuple(vals)
    if args.modes:
        kwargs["modes"] = tuple(args.modes)
    return TuningGrid(**kwargs, include_degenerate=not args.no_degenerate, schedule_kind=args.schedule)


def cmd_tune(args) -> int:
    cfg, dataset, groups, k = _load(args)
    res = grid_search(dataset, groups, k, args.criterion, _grid(args), args.objective, args.algorithm,
                      workers=_threads())
    out = _out_dir(args)
    (out / "tune_table.csv").write_text(res.to_csv(), encoding="utf-8")
    _write_json(out / "tune_best.json", {"dataset": cfg.name, "algorithm": args.algorithm, "criterion": args.criterion,
                                         "objective": args.objective, "k": k, "params": res.best_params,
                                         "report": _report(res.best_report, groups), "evaluated": len(res.table)})
    print(f"best {args.objective}: mfc={res.best_report.mfc:.4f} balance={res.best_report.balance:.4f} "
          f"params={_clean(res.best_params)}")
    return 0


def cmd_eval(args) -> int:
    cfg, dataset, groups, k = _load(args)
    tree = _read_tree(args.tree)
    _check_tree(tree, dataset.n)
    report = fairness_report(cut(tree, k), groups, pairwise_distances(dataset.points))
    out = _out_dir(args)
    _write_json(out / "eval_report.json", {"dataset": cfg.name, "k": k, "report": _report(report, groups)})
    print(f"mfc={report.mfc:.4f} balance={report.balance:.4f} silhouette={report.silhouette}")
    return 0


def shown_silhouette(report: FairnessReport) -> float:
    """Silhouette as reported in comparisons: clusterings with balance 0 count as -1."""
    if report.balance == 0 or report.silhouette is None:
        return -1.0
    return report.silhouette


COMPARE_FIELDS = (
    "dataset", "linkage", "algorithm", "objective", "params",
    "vanilla_metric", "fair_metric", "vanilla_mfc", "fair_mfc", "vanilla_balance", "fair_balance",
    "vanilla_silhouette", "fair_silhouette",
)


def cmd_compare(args) -> int:
    if not args.algorithms:
        raise UsageError("--algorithms needs at least one of fhac, fphac")
    if not args.criteria:
        raise UsageError("--criteria needs at least one linkage criterion")
    cfg, dataset, groups, k = _load(args)
    base = pairwise_distances(dataset.points)
    grid = _grid(args)
    metric = (lambda r: r.mfc) if args.objective == "mfc" else (lambda r: r.balance)
    rows = []
    bars: dict[str, list[float]] = {"vanilla": []}
    for alg in args.algorithms:
        bars[alg] = []
    for crit in args.criteria:
        vanilla = fairness_report(cut(vanilla_hac(dataset, crit, base=base), k), groups, base)
        bars["vanilla"].append(shown_silhouette(vanilla))
        for alg in args.algorithms:
            res = grid_search(dataset, groups, k, crit, grid, args.objective, alg, base=base, workers=_threads())
            fair = res.best_report
            bars[alg].append(shown_silhouette(fair))
            rows.append({
                "dataset": cfg.name, "linkage": crit, "algorithm": alg, "objective": args.objective,
                "params": json.dumps(_clean(res.best_params), sort_keys=True),
                "vanilla_metric": metric(vanilla), "fair_metric": metric(fair),
                "vanilla_mfc": vanilla.mfc, "fair_mfc": fair.mfc,
                "vanilla_balance": vanilla.balance, "fair_balance": fair.balance,
                "vanilla_silhouette": shown_silhouette(vanilla), "fair_silhouette": shown_silhouette(fair),
            })
            log.info("%s %s %s: vanilla %.4f fair %.4f", cfg.name, crit, alg, metric(vanilla), metric(fair))
    out = _out_dir(args)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COMPARE_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({key: (repr(v) if isinstance(v, float) else v) for key, v in row.items()})
    (out / "compare.csv").write_text(buf.getvalue(), encoding="utf-8")
    _write_json(out / "compare.json", {"dataset": cfg.name, "k": k, "n": dataset.n, "objective": args.objective,
                                       "rows": rows})
    svg = bar_chart_svg(f"Silhouette scores: {cfg.name}", list(args.criteria), bars)
    (out / f"silhouette_{cfg.name}.svg").write_text(svg, encoding="utf-8")
    for row in rows:
        print(f"{row['linkage']:>8} {row['algorithm']:>6}: vanilla {row['vanilla_metric']:.4f} "
              f"fair {row['fair_metric']:.4f}")
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="dataset config JSON, or a bundled name (census, bank, creditcard, toy)")
    p.add_argument("--k", type=int, help="number of clusters (default: from config)")
    p.add_argument("--seed", type=int, help="subsample seed (default: from config)")
    p.add_argument("--target-n", type=int, help="subsample size (default: from config)")
    p.add_argument("--out-dir", default=".", help="directory for output artifacts")


def _grid_flags(p: argparse.ArgumentParser) -> None:
    for name in ("theta1", "theta2", "alpha0", "beta0", "epsilon"):
        p.add_argument(f"--{name}", type=float, nargs="+", help=f"{name} values to search")
    p.add_argument("--modes", nargs="+", choices=MODES, help="FHAC selection modes to search")
    p.add_argument("--schedule", choices=SCHEDULE_KINDS, default="exponential")
    p.add_argument("--no-degenerate", action="store_true", help="omit the vanilla-equivalent configuration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairhac", description="Fair hierarchical agglomerative clustering")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="run vanilla HAC or FHAC")
    _common(p)
    p.add_argument("--algorithm", choices=("vanilla", "fhac"), default="vanilla")
    p.add_argument("--criterion", choices=CRITERIA, default="average")
    p.add_argument("--schedule", choices=SCHEDULE_KINDS, default="exponential")
    p.add_argument("--theta1", type=float, default=0.001)
    p.add_argument("--theta2", type=float, default=0.001)
    p.add_argument("--alpha0", type=float, default=0.0)
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--mode", choices=MODES, default="normalized")
    p.add_argument("--stop-at-k", action="store_true",
                   help="emit the FHAC forest at level k instead of completing the tree with plain merges")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("fix", help="repair a tree with FP-HAC")
    _common(p)
    p.add_argument("--tree", required=True)
    p.add_argument("--criterion", choices=CRITERIA, default="average")
    p.add_argument("--epsilon", type=float, default=math.inf)
    p.add_argument("--objective", choices=("mfc", "balance"), default="mfc")
    p.add_argument("--mode", choices=MODES, default="normalized",
                   help="paper-literal uses the weak swap-acceptance comparison")
    p.set_defaults(func=cmd_fix)

    p = sub.add_parser("tune", help="grid search FHAC or FP-HAC parameters")
    _common(p)
    p.add_argument("--criterion", choices=CRITERIA, default="average")
    p.add_argument("--objective", choices=("mfc", "balance"), default="mfc")
    p.add_argument("--algorithm", choices=("fhac", "fphac"), default="fhac")
    _grid_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("eval", help="fairness report for an existing tree")
    _common(p)
    p.add_argument("--tree", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="vanilla vs fair algorithms across linkages")
    _common(p)
    p.add_argument("--criteria", nargs="*", choices=CRITERIA, default=list(CRITERIA))
    p.add_argument("--algorithms", nargs="*", choices=("fhac", "fphac"), default=["fhac"])
    p.add_argument("--objective", choices=("mfc", "balance"), default="mfc")
    _grid_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (FairHACError, IngestError) as exc:
        print(f"fairhac {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"fairhac {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
