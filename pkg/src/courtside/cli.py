"""Command-line front end.

Every subcommand writes its artifacts plus a ``manifest.txt`` (key=value,
sorted keys) into ``--output-dir``. Outputs carry no timestamps, so two runs
with the same flags produce byte-identical directories.

Exit codes: 0 ok, 1 usage, 2 data or file error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from courtside import __version__, cart, forest, garson, metrics, mlp, prune, synth
from courtside.dataset import FEATURES, Dataset, fit_scaling, read_csv, scaling_to_csv, split, to_csv
from courtside.errors import DataError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# reference accuracies for the real 1999-2000 .. 2015-16 data, 202-row test split
REFERENCE = {
    "tree": (153, 202),
    "pruned": (153, 202),
    "forest": (169, 202),
    "mlp": (194, 202),
}
REFERENCE_BAND_PP = 5.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _mtry(text: str):
    return None if text == "auto" else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="courtside", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"courtside {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_input=True, split_flags=True):
        if needs_input:
            p.add_argument("--input", required=True, type=Path, help="team-season CSV")
        p.add_argument("--output-dir", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=0)
        if split_flags:
            p.add_argument("--train-fraction", type=float, default=0.6)
            p.add_argument("--stratify", action="store_true", help="stratify the split by the target label")
            p.add_argument("--target", choices=("playoffs", "champion"), default=None)

    def tree_flags(p):
        p.add_argument("--min-node-size", type=int, default=5)
        p.add_argument("--max-depth", type=int, default=30)

    def forest_flags(p):
        p.add_argument("--n-trees", type=int, default=500)
        p.add_argument("--mtry", type=_mtry, default=None, help="features per split, or 'auto' = floor(sqrt(p))")
        p.add_argument("--forest-min-node-size", type=int, default=1)
        p.add_argument("--n-jobs", type=int, default=1)

    def mlp_flags(p):
        p.add_argument("--hidden", type=int, default=20)
        p.add_argument("--decay", type=float, default=1e-7)
        p.add_argument("--learning-rate", type=float, default=0.1)
        p.add_argument("--max-iters", type=int, default=2000)
        p.add_argument("--tolerance", type=float, default=1e-9)
        p.add_argument("--init-range", type=float, default=0.5)
        p.add_argument("--loss", choices=("entropy", "squared"), default="entropy")
        p.add_argument("--grid-hidden", type=_ints, default=None, help="comma-separated hidden sizes to search")
        p.add_argument("--grid-decay", type=_floats, default=None, help="comma-separated decays to search")

    p = sub.add_parser("validate", help="check a CSV against the schema")
    common(p, split_flags=False)

    p = sub.add_parser("split", help="write seeded train/test CSVs")
    common(p)

    p = sub.add_parser("tree", help="grow a classification tree")
    common(p)
    tree_flags(p)

    p = sub.add_parser("prune", help="cross-validated cost-complexity pruning")
    common(p)
    tree_flags(p)
    p.add_argument("--folds", type=int, default=10)

    p = sub.add_parser("forest", help="random forest with Gini importance")
    common(p)
    forest_flags(p)

    p = sub.add_parser("mlp", help="train (or grid-search) the perceptron")
    common(p)
    mlp_flags(p)
    p.add_argument("--folds", type=int, default=10)

    p = sub.add_parser("importance", help="connection-weight importance of a saved model")
    common(p, needs_input=False, split_flags=False)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--unsigned", action="store_true", help="classic absolute-share variant")

    p = sub.add_parser("synth", help="write the synthetic dataset")
    common(p, needs_input=False, split_flags=False)
    p.set_defaults(seed=42)
    p.add_argument("--n-rows", type=int, default=505)
    p.add_argument("--output", type=Path, default=None, help="CSV path (default OUTPUT_DIR/synthetic.csv)")

    p = sub.add_parser("pipeline", help="split, tree, prune, forest and mlp with a reproduction report")
    common(p)
    tree_flags(p)
    forest_flags(p)
    mlp_flags(p)
    p.add_argument("--folds", type=int, default=10)
    return parser


class Run:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out: Path = args.output_dir
        self.manifest: dict[str, object] = {"command": args.command, "version": __version__}
        for key, value in sorted(vars(args).items()):
            if key != "command":
                self.manifest[key.replace("_", "-")] = value

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text, encoding="utf-8")

    def finish(self) -> None:
        lines = [f"{k}={_fmt(v)}" for k, v in sorted(self.manifest.items())]
        self.write("manifest.txt", "\n".join(lines) + "\n")

    def load(self) -> Dataset:
        data = read_csv(self.args.input)
        self.manifest["rows"] = len(data)
        for note in data.notes:
            print(f"note: {note}", file=sys.stderr)
        return data

    def target(self, default: str = "playoffs") -> str:
        t = self.args.target or default
        self.manifest["target"] = t
        return t

    def split(self, data: Dataset, target: str):
        pair = split(data, self.args.train_fraction, self.args.seed, stratify=target if self.args.stratify else None)
        self.manifest["train-rows"] = len(pair.train)
        self.manifest["test-rows"] = len(pair.test)
        self.manifest["split-seed"] = self.args.seed
        return pair


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _growth(args) -> cart.GrowthConfig:
    return cart.GrowthConfig(min_node_size=args.min_node_size, max_depth=args.max_depth)


def _paths_text(tree: cart.ClassificationTree, label: bool = True) -> str:
    paths = cart.decision_paths(tree, label)
    return "".join(f"{p}\n" for p in paths)


def _reference_line(name: str, acc: float) -> str:
    hits, total = REFERENCE[name]
    ref = hits / total
    gap = 100 * (acc - ref)
    inside = "within" if abs(gap) <= REFERENCE_BAND_PP else "outside"
    return (
        f"{name}: test accuracy {metrics.format_pct(acc)}; reference {hits}/{total} = {metrics.format_pct(ref)}; "
        f"difference {gap:+.2f} pp ({inside} the expected +/-{REFERENCE_BAND_PP:g} pp band)\n"
    )


def cmd_validate(run: Run) -> None:
    data = run.load()
    y = data.labels("playoffs")
    c = data.labels("champion")
    text = (
        f"rows: {len(data)}\n"
        f"playoffs TRUE: {int(y.sum())}\n"
        f"champion TRUE: {int(c.sum())}{'' if data.has_champion else ' (no Champion column)'}\n"
        "status: ok\n"
    )
    run.write("validate.txt", text)
    print(text, end="")


def cmd_split(run: Run) -> None:
    data = run.load()
    pair = run.split(data, run.target())
    run.write("train.csv", to_csv(pair.train))
    run.write("test.csv", to_csv(pair.test))


def _fit_tree(run: Run, pair, target):
    X, y = pair.train.X, pair.train.labels(target)
    return cart.grow_tree(X, y, _growth(run.args), FEATURES)


def cmd_tree(run: Run) -> None:
    data = run.load()
    target = run.target()
    pair = run.split(data, target)
    tree = _fit_tree(run, pair, target)
    y_test = pair.test.labels(target)
    cm = metrics.confusion(cart.predict_all(tree, pair.test.X), y_test)
    run.manifest["tree-leaves"] = tree.n_leaves
    run.write("tree.dot", cart.to_dot(tree))
    run.write("tree.txt", cart.to_text(tree))
    run.write("confusion.txt", metrics.report(f"classification tree ({tree.n_leaves} leaves)", cm, y_test))


def _prune(run: Run, pair, target):
    X, y = pair.train.X, pair.train.labels(target)
    curve = prune.cv_select_size(X, y, run.args.folds, run.args.seed, _growth(run.args), FEATURES)
    full = curve.sequence.full_tree
    pruned = prune.prune_to_size(curve.sequence, curve.chosen_size)
    run.manifest["cv-folds"] = run.args.folds
    run.manifest["cv-seed"] = run.args.seed
    run.manifest["cv-chosen-size"] = curve.chosen_size
    run.manifest["tree-leaves"] = full.n_leaves
    return curve, full, pruned


def cmd_prune(run: Run) -> None:
    data = run.load()
    target = run.target()
    pair = run.split(data, target)
    curve, full, pruned = _prune(run, pair, target)
    y_test = pair.test.labels(target)
    cm_full = metrics.confusion(cart.predict_all(full, pair.test.X), y_test)
    cm_pruned = metrics.confusion(cart.predict_all(pruned, pair.test.X), y_test)
    run.write("cv_curve.csv", curve.to_csv())
    run.write("pruned_tree.dot", cart.to_dot(pruned, "pruned"))
    run.write("pruned_tree.txt", cart.to_text(pruned))
    run.write("paths.txt", _paths_text(pruned))
    run.write(
        "confusion.txt",
        metrics.report(f"unpruned tree ({full.n_leaves} leaves)", cm_full, y_test)
        + "\n"
        + metrics.report(f"pruned tree ({pruned.n_leaves} leaves)", cm_pruned, y_test),
    )


def _forest_config(args) -> forest.ForestConfig:
    return forest.ForestConfig(
        n_trees=args.n_trees,
        mtry=args.mtry,
        seed=args.seed,
        growth=cart.GrowthConfig(min_node_size=args.forest_min_node_size),
    )


def _forest(run: Run, pair, target):
    cfg = _forest_config(run.args)
    f = forest.grow_forest(pair.train.X, pair.train.labels(target), cfg, FEATURES, n_jobs=run.args.n_jobs)
    run.manifest["forest-mtry"] = cfg.resolved_mtry(len(FEATURES))
    run.manifest["forest-tree-seeds"] = f"({run.args.seed}, tree index 0..{cfg.n_trees - 1})"
    return f


def cmd_forest(run: Run) -> None:
    data = run.load()
    target = run.target()
    pair = run.split(data, target)
    f = _forest(run, pair, target)
    y_test = pair.test.labels(target)
    cm = metrics.confusion(forest.predict_forest_all(f, pair.test.X), y_test)
    run.write("confusion.txt", metrics.report(f"random forest ({len(f.trees)} trees)", cm, y_test))
    run.write("importance.csv", forest.importance_csv(forest.importance_report(f)))


def _mlp_config(args, **overrides) -> mlp.MlpConfig:
    fields = dict(
        hidden=args.hidden,
        decay=args.decay,
        learning_rate=args.learning_rate,
        max_iters=args.max_iters,
        tolerance=args.tolerance,
        seed=args.seed,
        init_range=args.init_range,
        loss=args.loss,
    )
    fields.update(overrides)
    return mlp.MlpConfig(**fields)


def _mlp(run: Run, pair, target):
    args = run.args
    scaling = fit_scaling(pair.train)
    X = scaling.transform(pair.train.X)
    y = pair.train.labels(target)
    cfg = _mlp_config(args)
    if args.grid_hidden or args.grid_decay:
        grid = mlp.cv_grid_search(
            X, y, args.grid_hidden or [args.hidden], args.grid_decay or [args.decay], args.folds, args.seed, cfg
        )
        run.write("grid.csv", grid.to_csv())
        cfg = grid.best
        run.manifest["grid-best-hidden"] = cfg.hidden
        run.manifest["grid-best-decay"] = cfg.decay
    result = mlp.train(X, y, cfg)
    run.manifest["mlp-iterations"] = result.iterations
    run.manifest["mlp-final-loss"] = result.losses[-1]
    run.write("model.txt", mlp.to_text(result.net))
    run.write("scaling.csv", scaling_to_csv(scaling))
    pred = mlp.predict_mlp_all(result.net, scaling.transform(pair.test.X))
    return result, pred


def cmd_mlp(run: Run) -> None:
    data = run.load()
    target = run.target("champion")
    pair = run.split(data, target)
    result, pred = _mlp(run, pair, target)
    y_test = pair.test.labels(target)
    cm = metrics.confusion(pred, y_test)
    run.write("confusion.txt", metrics.report(f"perceptron ({result.net.h} hidden)", cm, y_test))


def cmd_importance(run: Run) -> None:
    net = mlp.from_text(run.args.model.read_text(encoding="utf-8"))
    names = FEATURES if net.p == len(FEATURES) else None
    imp = garson.garson_importance(net, names, signed=not run.args.unsigned)
    run.manifest["degenerate"] = imp.degenerate
    run.write("garson.csv", imp.to_csv())
    run.write("garson.txt", imp.render())
    run.write("garson.svg", garson.to_svg(imp))


def cmd_synth(run: Run) -> None:
    data = synth.generate(run.args.seed, run.args.n_rows)
    path = run.args.output or run.out / "synthetic.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(data), encoding="utf-8")
    run.manifest["rows"] = len(data)
    run.manifest["output"] = str(path)


def cmd_pipeline(run: Run) -> None:
    data = run.load()
    target = run.target()
    pair = run.split(data, target)
    y_test = pair.test.labels(target)

    curve, full, pruned = _prune(run, pair, target)
    f = _forest(run, pair, target)
    accs = {}
    sections = []
    for name, label, pred in (
        ("tree", f"unpruned tree ({full.n_leaves} leaves)", cart.predict_all(full, pair.test.X)),
        ("pruned", f"pruned tree ({pruned.n_leaves} leaves)", cart.predict_all(pruned, pair.test.X)),
        ("forest", f"random forest ({len(f.trees)} trees)", forest.predict_forest_all(f, pair.test.X)),
    ):
        cm = metrics.confusion(pred, y_test)
        accs[name] = metrics.accuracy(cm)
        sections.append(metrics.report(label, cm, y_test))

    champ_test = pair.test.labels("champion")
    result, pred = _mlp(run, pair, "champion")
    cm = metrics.confusion(pred, champ_test)
    accs["mlp"] = metrics.accuracy(cm)
    sections.append(metrics.report(f"perceptron on champion ({result.net.h} hidden)", cm, champ_test))

    ranking = forest.importance_report(f)
    imp = garson.garson_importance(result.net, FEATURES)
    run.write("cv_curve.csv", curve.to_csv())
    run.write("pruned_tree.dot", cart.to_dot(pruned, "pruned"))
    run.write("paths.txt", _paths_text(pruned))
    run.write("importance.csv", forest.importance_csv(ranking))
    run.write("garson.csv", imp.to_csv())
    run.write("garson.txt", imp.render())
    run.write("garson.svg", garson.to_svg(imp))

    notes = [
        "reproduction notes\n",
        f"test rows: {len(pair.test)} (target {target}); cv-chosen tree size: {curve.chosen_size} leaves\n",
    ]
    notes += [_reference_line(k, accs[k]) for k in ("tree", "pruned", "forest")]
    notes.append(
        "forest reference uses the tabulated 74 true negatives; the alternative count of 76 "
        f"would give 171/202 = {metrics.format_pct(171 / 202)}\n"
    )
    notes.append(_reference_line("mlp", accs["mlp"]))
    notes.append(
        f"mlp majority baseline on this test split: {metrics.format_pct(metrics.majority_baseline(champ_test))}"
        " (always predicting FALSE)\n"
    )
    notes.append("the reference is reproducible only approximately: split seed, folds and training details differ\n")
    notes.append("top forest importances: " + ", ".join(e.feature for e in ranking[:3]) + "\n")
    notes.append(
        "perceptron importance extremes: most positive "
        f"{imp.features[0]}, most negative {imp.features[-1]}\n"
    )
    run.write("report.txt", "\n".join(sections) + "\n" + "".join(notes))
    print("".join(notes), end="")


COMMANDS = {
    "validate": cmd_validate,
    "split": cmd_split,
    "tree": cmd_tree,
    "prune": cmd_prune,
    "forest": cmd_forest,
    "mlp": cmd_mlp,
    "importance": cmd_importance,
    "synth": cmd_synth,
    "pipeline": cmd_pipeline,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"courtside: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    job = Run(args)
    try:
        COMMANDS[args.command](job)
        job.finish()
    except (DataError, OSError, UnicodeDecodeError) as e:
        print(f"courtside: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"courtside: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"courtside: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
