"""Command-line driver.

Subcommands: extract, train, rfe, evaluate, predict, info. Every flag can
also come from a ``--config`` file of ``key = value`` lines (keys are flag
names without the leading dashes); flags given on the command line win.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import datetime as _dt
import logging
import sys
from pathlib import Path

import numpy as np

from artforensics import __version__, dataset, imaging, modelio, preprocess
from artforensics.errors import (
    ArtForensicsError,
    DecodeError,
    DegenerateLabels,
    EmptyDataset,
    InvalidInput,
    LabelError,
    ShapeError,
    StratificationError,
    UnsupportedModelFile,
)
from artforensics.evaluation import ExperimentReport, confusion, render_report
from artforensics.features import FEATURE_NAMES, ExtractorConfig, extract_all
from artforensics.modelio import ModelFile
from artforensics.neural import CNNConfig, train_cnn
from artforensics.select import (
    PUBLISHED_BEST,
    GridSpec,
    fit_model,
    grid_search,
    make_config,
    predict_labels,
    rfe,
)
from artforensics.stats import build_histogram

log = logging.getLogger("artforensics")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAINING = 0, 1, 2, 3

HISTOGRAM_BINS = 20


class UsageError(Exception):
    pass


class TrainingError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- helpers ------------------------------------------------------------------

def _parse_value(text: str):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_params(items) -> dict[str, list]:
    """``["C=0.1,1,10", "kernel=rbf"]`` -> ``{"C": [0.1, 1, 10], "kernel": ["rbf"]}``.

    Tuples such as ``hidden_layer_sizes=(50,50);(100,)`` separate values
    with ``;``.
    """
    axes: dict[str, list] = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        sep = ";" if ";" in raw or raw.strip().startswith("(") else ","
        axes[key.strip()] = [_parse_value(v) for v in raw.split(sep) if v.strip()]
    return axes


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict[str, str]):
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown configuration key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split("|") if v.strip()]
        elif action.nargs in ("*", "+"):
            defaults[key] = raw.split()
        else:
            defaults[key] = action.type(raw) if action.type else raw
    sub.set_defaults(**defaults)


def _extractor_config(args) -> ExtractorConfig:
    return ExtractorConfig(side=args.side, canny_low=args.canny_low, canny_high=args.canny_high,
                           glcm_levels=args.glcm_levels)


def _report_dir(args) -> Path:
    if args.report_dir:
        return Path(args.report_dir)
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    return Path("reports") / stamp


def _load_features(args):
    if not args.features:
        raise UsageError("--features is required")
    table = dataset.read_table(args.features)
    meta = dataset.read_sidecar(args.features) or {}
    extractor = ExtractorConfig(**meta["extractor"]) if "extractor" in meta else None
    subset = _feature_subset(args)
    if subset:
        unknown = [n for n in subset if n not in table.feature_names]
        if unknown:
            raise UsageError(f"unknown feature names: {', '.join(unknown)}")
        table = table.project(subset)
    return table, extractor, meta.get("extractor_hash", "unknown")


def _feature_subset(args) -> list[str]:
    spec = getattr(args, "feature_subset", None)
    if not spec:
        return []
    if spec.startswith("@"):
        text = Path(spec[1:]).read_text(encoding="utf-8")
        return [t.strip() for t in text.replace(",", "\n").splitlines() if t.strip()]
    return [t.strip() for t in spec.split(",") if t.strip()]


def _grid_for(args) -> GridSpec:
    params = parse_params(args.param)
    if args.grid == "published":
        axes = {k: list(v) for k, v in GridSpec.published(args.family).axes.items()}
        axes.update(params)
    elif args.grid == "best":
        axes = {k: [v] for k, v in PUBLISHED_BEST[(args.family, args.task)].items()}
        axes.update(params)
    else:
        axes = params or ({"max_iter": [200]} if args.family == "mlp" else {"C": [1.0]})
    return GridSpec(args.family, axes)


def _single_config(args):
    params = {k: v[0] for k, v in _grid_for(args).axes.items()}
    return params, make_config(args.family, params)


def _model_metadata(args, extra=None) -> dict:
    meta = {"package_version": __version__, "seed": args.seed, "command": args.command}
    meta.update(extra or {})
    return meta


def _split(y, args, class_names):
    return dataset.stratified_split(y, (1.0 - args.test_size, args.test_size), args.seed,
                                    class_names)


def _fit_and_test(family, cfg, table, y, split, task, n_classes):
    scaler = preprocess.fit(table.X[split.train])
    model = fit_model(family, cfg, scaler.transform(table.X[split.train]), y[split.train], task,
                      n_classes)
    pred = predict_labels(family, model, scaler.transform(table.X[split.test]))
    return scaler, model, pred


# -- subcommands --------------------------------------------------------------

def write_feature_histograms(table: dataset.FeatureTable, path, bins: int = HISTOGRAM_BINS):
    """Per-class histograms of every feature over a shared per-feature range."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "class_label", "bin", "bin_low", "bin_high", "count"])
        for j, name in enumerate(table.feature_names):
            col = table.X[:, j]
            low, high = float(col.min()), float(col.max())
            if not high > low:
                high = low + 1.0
            edges = np.linspace(low, high, bins + 1)
            for c, cname in enumerate(table.class_names):
                values = col[table.class_labels == c]
                counts = build_histogram(values, bins, (low, high)).counts
                for b in range(bins):
                    w.writerow([name, cname, b, repr(float(edges[b])), repr(float(edges[b + 1])),
                                int(counts[b])])


def cmd_extract(args) -> int:
    manifest = dataset.scan(args.root)
    config = _extractor_config(args)
    out = Path(args.out)
    table, report = dataset.build_feature_table(manifest, out, config, workers=args.workers,
                                                seed=args.seed)
    hist_path = out.with_name(out.stem + ".histograms.csv")
    write_feature_histograms(table, hist_path)
    for path, err in report.failures:
        print(f"failed: {path}: {err}", file=sys.stderr)
    print(f"{report.extracted} extracted, {report.cached} cached, {len(report.failures)} failed")
    print(f"wrote {out} ({len(table)} rows) and {hist_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.family == "cnn":
        return _train_cnn(args)
    table, extractor, extractor_hash = _load_features(args)
    task = args.task
    y = table.labels(task)
    class_names = table.task_class_names(task)
    n_classes = len(class_names)
    split = _split(y, args, class_names)

    grid = _grid_for(args)
    train_rows = split.train

    def guard(rows):
        # Fold indices refer to the training partition; the test partition is never passed in.
        if rows.max(initial=-1) >= len(train_rows):
            raise AssertionError("fold fit reached outside the training partition")

    result = grid_search(grid, table.X[train_rows], y[train_rows], task, args.folds, args.seed,
                         n_classes, on_fit=guard)
    if result.best is None:
        msgs = "; ".join(sorted({r.message for r in result.rows if r.message}))
        raise TrainingError(f"no grid cell trained successfully: {msgs}")
    cfg = result.best_config
    scaler, model, pred = _fit_and_test(args.family, cfg, table, y, split, task, n_classes)
    cm = confusion(y[split.test], pred, range(n_classes), class_names)
    report = ExperimentReport(
        task=task, model_family=args.family, best_config=result.best_params,
        cv_mean_accuracy=result.best.mean, test_accuracy=cm.accuracy(), confusion=cm,
        seed=args.seed, extractor_config_hash=extractor_hash, feature_names=table.feature_names,
        grid=result,
        notes=[f"stratified {args.folds}-fold cross-validation on the "
               f"{1 - args.test_size:.0%} training partition"],
    )
    summary = render_report(report, _report_dir(args))
    print(summary, end="")
    if args.model:
        modelio.save_model(ModelFile(args.family, task, model, class_names, scaler,
                                     table.feature_names, extractor,
                                     _model_metadata(args, {"config": result.best_params})),
                           args.model)
        print(f"saved model to {args.model}")
    return EXIT_OK


def load_image_set(root, side):
    manifest = dataset.scan(root)
    images, labels, paths = [], [], []
    for path, label in manifest.entries:
        try:
            img = imaging.load_image(path)
        except (DecodeError, OSError) as exc:
            print(f"failed: {path}: {exc}", file=sys.stderr)
            continue
        images.append(imaging.resize_bilinear(img, side))
        labels.append(label)
        paths.append(path)
    if not images:
        raise EmptyDataset(f"no decodable images under {root}")
    return np.stack(images).astype(np.float64), np.array(labels, dtype=np.int64), paths, manifest


def _train_cnn(args) -> int:
    if not args.images:
        raise UsageError("CNN training needs --images ROOT")
    params = {k: v[0] for k, v in parse_params(args.param).items()}
    images, class_labels, _, manifest = load_image_set(args.images, args.input_side)
    task = args.task
    if task == "binary":
        y = np.array([dataset.binary_label_for(manifest.class_names[c]) for c in class_labels])
        class_names = ("human", "ai")
    else:
        y = class_labels
        class_names = manifest.class_names
    cfg = CNNConfig(
        input_side=args.input_side,
        architecture=args.architecture or ("binary11" if task == "binary" else "multiclass9"),
        dropout_rate=float(params.get("dropout_rate", args.dropout)),
        l2_weight=float(params.get("l2_weight", args.l2)),
        final_activation=params.get("final_activation", args.final_activation),
        epochs=args.epochs if args.epochs is not None else (4 if task == "binary" else 18),
        seed=args.seed,
        n_classes=len(class_names),
    )
    split = dataset.stratified_split(y, (0.8, 0.1, 0.1), args.seed, class_names)
    model, history = train_cnn(images, y, cfg, split.train, split.validation)
    labels, _ = modelio.ModelFile("cnn", task, model, class_names).predict_images(images[split.test])
    cm = confusion(y[split.test], labels, range(len(class_names)), class_names)
    report = ExperimentReport(
        task=task, model_family="cnn", best_config=cfg.to_dict(), cv_mean_accuracy=None,
        test_accuracy=cm.accuracy(), confusion=cm, seed=args.seed,
        extractor_config_hash="raw-pixels", epochs=history,
        notes=["80:10:10 train:test:validation split"],
    )
    print(render_report(report, _report_dir(args)), end="")
    if args.model:
        modelio.save_model(ModelFile("cnn", task, model, class_names,
                                     metadata=_model_metadata(args)), args.model)
        print(f"saved model to {args.model}")
    return EXIT_OK


def cmd_rfe(args) -> int:
    table, extractor, extractor_hash = _load_features(args)
    task = args.task
    y = table.labels(task)
    class_names = table.task_class_names(task)
    n_classes = len(class_names)
    split = _split(y, args, class_names)
    params, cfg = _single_config(args)
    train = split.train
    curve = rfe(args.family, cfg, table.X[train], y[train], table.feature_names, task,
                args.folds, args.seed, n_classes)
    point = curve.at(args.select) if args.select else curve.best()
    sub = table.project(point.kept_features)
    scaler, model, pred = _fit_and_test(args.family, cfg, sub, y, split, task, n_classes)
    cm = confusion(y[split.test], pred, range(n_classes), class_names)
    report = ExperimentReport(
        task=task, model_family=args.family, best_config=params,
        cv_mean_accuracy=point.cv_accuracy, test_accuracy=cm.accuracy(), confusion=cm,
        seed=args.seed, extractor_config_hash=extractor_hash, feature_names=point.kept_features,
        rfe_curve=curve,
        notes=["features ranked by an L2 logistic-regression surrogate for every model family",
               "curve accuracies are k-fold CV means on the training partition; "
               "test accuracy uses the selected feature subset"],
    )
    print(render_report(report, _report_dir(args)), end="")
    if args.model:
        modelio.save_model(ModelFile(args.family, task, model, class_names, scaler,
                                     point.kept_features, extractor,
                                     _model_metadata(args, {"config": params})), args.model)
        print(f"saved model to {args.model}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    mf = modelio.load_model(args.model)
    if mf.model_family == "cnn":
        images, class_labels, _, manifest = load_image_set(args.images or args.features,
                                                           mf.input_side)
        y = (np.array([dataset.binary_label_for(manifest.class_names[c]) for c in class_labels])
             if mf.task == "binary" else class_labels)
        labels, _ = mf.predict_images(images)
        extractor_hash = "raw-pixels"
    else:
        table = dataset.read_table(args.features)
        meta = dataset.read_sidecar(args.features) or {}
        extractor_hash = meta.get("extractor_hash", "unknown")
        y = table.labels(mf.task)
        X = table.project(mf.feature_names).X
        if args.split == "test":
            split = _split(y, args, mf.class_names)
            X, y = X[split.test], y[split.test]
        labels, _ = mf.predict_features(X)
    cm = confusion(y, labels, range(len(mf.class_names)), mf.class_names)
    report = ExperimentReport(
        task=mf.task, model_family=mf.model_family, best_config=mf.metadata.get("config", {}),
        cv_mean_accuracy=None, test_accuracy=cm.accuracy(), confusion=cm, seed=args.seed,
        extractor_config_hash=extractor_hash, feature_names=mf.feature_names,
    )
    print(render_report(report, _report_dir(args)), end="")
    return EXIT_OK


def _expand_inputs(inputs):
    out = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files = sorted(f for f in p.rglob("*") if f.is_file()
                           and f.suffix.lower() in imaging.IMAGE_SUFFIXES)
            out.extend(str(f) for f in files)
        else:
            out.append(str(p))
    return out


def cmd_predict(args) -> int:
    mf = modelio.load_model(args.model)
    failed = 0
    print("path,label,score")
    for item in _expand_inputs(args.inputs):
        if item.lower().endswith(".csv"):
            table = dataset.read_table(item)
            labels, scores = mf.predict_features(table.project(mf.feature_names).X)
            for path, lab, s in zip(table.paths, labels, scores):
                print(f"{path},{mf.class_names[lab]},{float(s)!r}")
            continue
        try:
            img = imaging.load_image(item)
        except (DecodeError, OSError) as exc:
            print(f"failed: {item}: {exc}", file=sys.stderr)
            failed += 1
            continue
        if mf.model_family == "cnn":
            x = imaging.resize_bilinear(img, mf.input_side)[None].astype(np.float64)
            labels, scores = mf.predict_images(x)
        else:
            config = mf.extractor_config or ExtractorConfig()
            vec = extract_all(img, config)
            cols = [FEATURE_NAMES.index(n) for n in mf.feature_names]
            labels, scores = mf.predict_features(vec[cols][None, :])
        print(f"{item},{mf.class_names[labels[0]]},{float(scores[0])!r}")
    return EXIT_DATA if failed else EXIT_OK


def cmd_info(args) -> int:
    path = Path(args.path)
    if path.suffix.lower() == ".csv":
        table = dataset.read_table(path)
        meta = dataset.read_sidecar(path) or {}
        print(f"feature table: {len(table)} rows, {len(table.feature_names)} features")
        for c, name in enumerate(table.class_names):
            n = int(np.sum(table.class_labels == c))
            print(f"  {name}: {n} rows (binary label {dataset.binary_label_for(name)})")
        if meta:
            print(f"extractor: {meta.get('extractor')} (hash {meta.get('extractor_hash')})")
        return EXIT_OK
    mf = modelio.load_model(path)
    print(f"model: {mf.model_family} ({mf.task}), format version {modelio.FORMAT_VERSION}")
    print(f"classes: {', '.join(mf.class_names)}")
    if mf.feature_names:
        print(f"features ({len(mf.feature_names)}): {', '.join(mf.feature_names)}")
    if mf.input_side:
        print(f"input side: {mf.input_side}, architecture: {mf.model.config.architecture}, "
              f"layers: {len(mf.model)}")
    if mf.extractor_config:
        print(f"extractor: {mf.extractor_config.to_dict()}")
    for key in sorted(mf.metadata):
        print(f"{key}: {mf.metadata[key]}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_common_training(p):
    p.add_argument("--features", help="feature CSV written by 'extract'")
    p.add_argument("--task", choices=("binary", "multiclass"), default="binary")
    p.add_argument("--family", choices=("lr", "svm", "mlp", "cnn"), default="svm")
    p.add_argument("--param", action="append", metavar="KEY=VALUES",
                   help="hyperparameter values, e.g. C=0.1,1,10 (repeatable)")
    p.add_argument("--feature-subset", dest="feature_subset",
                   help="comma-separated feature names, or @file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-size", dest="test_size", type=float, default=0.2)
    p.add_argument("--model", help="where to write the trained model file")
    p.add_argument("--report-dir", dest="report_dir",
                   help="report directory (default reports/<timestamp>)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = _Parser(prog="artforensics", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key = value file mirroring the flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    subs = {}

    p = sub.add_parser("extract", help="extract the 39 features from root/<class>/<images>")
    p.add_argument("root", nargs="?")
    p.add_argument("--out", default="features.csv")
    p.add_argument("--side", type=int, default=255)
    p.add_argument("--canny-low", dest="canny_low", type=float, default=imaging.DEFAULT_CANNY_LOW)
    p.add_argument("--canny-high", dest="canny_high", type=float,
                   default=imaging.DEFAULT_CANNY_HIGH)
    p.add_argument("--glcm-levels", dest="glcm_levels", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    subs["extract"] = p

    p = sub.add_parser("train", help="split, grid-search, fit and test a model")
    _add_common_training(p)
    p.add_argument("--grid", choices=("published", "best", "none"), default="none",
                   help="start from the published grid, its best cell, or only --param values")
    p.add_argument("--images", help="image root for CNN training")
    p.add_argument("--input-side", dest="input_side", type=int, default=64)
    p.add_argument("--architecture", choices=("binary11", "multiclass9"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--final-activation", dest="final_activation",
                   choices=("sigmoid", "softmax"), default="sigmoid")
    subs["train"] = p

    p = sub.add_parser("rfe", help="recursive feature elimination curve")
    _add_common_training(p)
    p.add_argument("--grid", choices=("best", "none"), default="best",
                   help="hyperparameters: the published best cell (default) or only --param")
    p.add_argument("--select", type=int, help="feature count for the final model "
                   "(default: best CV accuracy)")
    subs["rfe"] = p

    p = sub.add_parser("evaluate", help="score a saved model on a feature CSV or image root")
    p.add_argument("--model", required=False)
    p.add_argument("--features")
    p.add_argument("--images")
    p.add_argument("--split", choices=("all", "test"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-size", dest="test_size", type=float, default=0.2)
    p.add_argument("--report-dir", dest="report_dir")
    subs["evaluate"] = p

    p = sub.add_parser("predict", help="predict labels for images, directories or feature CSVs")
    p.add_argument("--model")
    p.add_argument("inputs", nargs="*")
    subs["predict"] = p

    p = sub.add_parser("info", help="describe a model file or feature CSV")
    p.add_argument("path", nargs="?")
    subs["info"] = p
    return parser, subs


COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "rfe": cmd_rfe,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "info": cmd_info,
}

REQUIRED = {
    "extract": ("root",),
    "evaluate": ("model",),
    "predict": ("model", "inputs"),
    "info": ("path",),
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        if args.config:
            _apply_config(subs[args.command], read_config_file(args.config))
            args = parser.parse_args(argv)
        missing = [name for name in REQUIRED.get(args.command, ()) if not getattr(args, name)]
        if missing:
            raise UsageError(f"{args.command}: missing {', '.join(missing)}")
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    except (UsageError, OSError) as exc:
        print(f"artforensics: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"artforensics: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingError, DegenerateLabels) as exc:
        print(f"artforensics: training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (OSError, DecodeError, EmptyDataset, StratificationError, UnsupportedModelFile,
            InvalidInput, ShapeError, LabelError) as exc:
        print(f"artforensics: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArtForensicsError as exc:
        print(f"artforensics: training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())
