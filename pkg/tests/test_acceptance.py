"""Acceptance suite: one test per headline criterion.

Each test records a PASS/FAIL line (with the measured numbers) that the
conftest hook prints at the end of the run. The four-class check on real
artwork runs only when ARTFORENSICS_DATA names a directory with the
human/AI baroque and expressionism class folders.
"""

import json
import os
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from artforensics import dataset, features, models, neural, preprocess
from artforensics import select as S
from artforensics.evaluation import ConfusionMatrix, provenance_errors
from artforensics.stats import build_histogram, describe, shannon_entropy
from gradcheck import cnn_check, lr_check, mlp_check
from oracles import entropy_naive, glcm_naive, histogram_naive, lbp_naive, moments_naive
from synth import informative_table, write_two_class_set

RESULTS: list[tuple[str, bool, str]] = []


@contextmanager
def criterion(name):
    """Record PASS/FAIL for ``name``; the body appends detail strings to the yielded list."""
    details: list[str] = []
    try:
        yield details
    except BaseException as exc:
        msg = f"{type(exc).__name__}: {exc}".splitlines()[0]
        RESULTS.append((name, False, "; ".join(details + [msg])))
        raise
    RESULTS.append((name, True, "; ".join(details)))


def check(cond, message):
    assert cond, message


# -- 1. oracle equivalence -----------------------------------------------------

def test_oracle_equivalence():
    with criterion("oracle equivalence (GLCM, LBP, histogram/statistics; < 10 s)") as d:
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        glcm_ok = lbp_ok = 0
        worst = 0.0
        for _ in range(100):
            g = rng.integers(0, 256, (16, 16)).astype(np.float64)
            glcm_ok += np.array_equal(features.glcm(g), glcm_naive(g))
            lbp_ok += np.array_equal(features.lbp_codes(g), lbp_naive(g))
            vals = rng.normal(rng.uniform(-50, 50), rng.uniform(0.1, 30), 200)
            s = describe(vals)
            for got, ref in zip((s.mean, s.variance, s.skewness, s.kurtosis), moments_naive(vals)):
                worst = max(worst, abs(got - ref) / max(abs(ref), 1.0))
            h = build_histogram(vals, 32, (-100.0, 100.0))
            check(h.counts.tolist() == histogram_naive(vals, 32, -100.0, 100.0), "histogram")
            e = shannon_entropy(h)
            worst = max(worst, abs(e - entropy_naive(h.counts.tolist())) / max(e, 1.0))
        elapsed = time.perf_counter() - t0
        d += [f"GLCM exact {glcm_ok}/100", f"LBP exact {lbp_ok}/100",
              f"max stats rel err {worst:.1e}", f"{elapsed:.2f} s"]
        check(glcm_ok == 100 and lbp_ok == 100, "optimized path differs from oracle")
        check(worst < 1e-9, "statistics differ from brute force")
        check(elapsed < 10, "too slow")


# -- 2. checkerboard -------------------------------------------------------------

def test_checkerboard_texture():
    with criterion("1-px checkerboard: contrast 961, energy sqrt(0.5), homogeneity 1/32, "
                   "correlation -1") as d:
        board = (np.indices((32, 32)).sum(axis=0) % 2) * 255.0
        got = dict(zip(("contrast", "correlation", "energy", "homogeneity"),
                       features.glcm_features(features.glcm(board))))
        want = {"contrast": 961.0, "correlation": -1.0, "energy": np.sqrt(0.5),
                "homogeneity": 0.03125}
        err = max(abs(got[k] - want[k]) for k in want)
        d.append(f"max abs err {err:.1e}")
        check(err < 1e-9, f"got {got}")


# -- 3. gradients ---------------------------------------------------------------

def test_gradient_checks():
    with criterion("gradient checks (LR < 1e-5, MLP/CNN < 1e-4; < 30 s)") as d:
        t0 = time.perf_counter()
        lr = max(lr_check(task, seed) for task in ("binary", "multiclass") for seed in range(3))
        mlp = max(mlp_check(task, act, seed=seed) for task in ("binary", "multiclass")
                  for act in ("relu", "logistic", "identity") for seed in range(2))
        cnn = max(cnn_check("multiclass9", 16, 6, "softmax"),
                  cnn_check("multiclass9", 16, 6, "sigmoid", dropout_rate=0.2),
                  cnn_check("binary11", 22, 2, "sigmoid", l2_weight=0.0))
        elapsed = time.perf_counter() - t0
        d += [f"LR {lr:.1e}", f"MLP {mlp:.1e}", f"CNN {cnn:.1e}", f"{elapsed:.1f} s"]
        check(lr < 1e-5 and mlp < 1e-4 and cnn < 1e-4, "gradient mismatch")
        check(elapsed < 30, "too slow")


# -- 4. SVM optimality ------------------------------------------------------------

def _random_feasible(y, C, n_points, rng):
    A = rng.uniform(0, C, (n_points, len(y)))
    A *= rng.random(A.shape) < rng.uniform(0.15, 1.0, (n_points, 1))
    pos = y > 0
    sp, sn = A[:, pos].sum(axis=1), A[:, ~pos].sum(axis=1)
    A[:, pos] *= np.where(sp > sn, sn / np.where(sp > 0, sp, 1), 1.0)[:, None]
    A[:, ~pos] *= np.where(sn > sp, sp / np.where(sn > 0, sn, 1), 1.0)[:, None]
    return A


def test_svm_optimality():
    with criterion("SVM optimality (constraints 1e-8, KKT 1e-3, beats 1e5 random duals, "
                   "4-point f(x)=x1-1)") as d:
        rng = np.random.default_rng(7)
        worst_box = worst_eq = worst_kkt = 0.0
        worst_margin = np.inf
        for p in range(20):
            X = rng.normal(size=(12, 2))
            y = np.where(rng.permutation(12) < 6, 1.0, -1.0)
            C = float(rng.choice([0.1, 1.0, 10.0]))
            kernel = "rbf" if p % 2 else "linear"
            K = models.kernel_matrix(X, X, kernel, 0.5)
            res = models.smo(K, y, C)
            a = res.alpha
            worst_box = max(worst_box, max(-a.min(), a.max() - C, 0.0))
            worst_eq = max(worst_eq, abs(a @ y))
            worst_kkt = max(worst_kkt, models.kkt_gap(a, y, K, C))
            A = _random_feasible(y, C, 100_000, rng)
            AY = A * y
            vals = A.sum(axis=1) - 0.5 * np.einsum("ni,ij,nj->n", AY, K, AY)
            worst_margin = min(worst_margin, models.dual_objective(a, y, K) - vals.max())
        four = models.train_svm(np.array([[0.0, 0], [0, 1], [2, 0], [2, 1]]),
                                np.array([0, 0, 1, 1]),
                                models.SVMConfig(c=100, kernel="linear"))
        probe = np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0], [1.0, 5.0], [4.0, -3.0]])
        plane_err = np.max(np.abs(four.decision_function(probe) - (probe[:, 0] - 1)))
        d += [f"box {worst_box:.1e}", f"equality {worst_eq:.1e}", f"KKT gap {worst_kkt:.1e}",
              f"min(dual - best random) {worst_margin:.2e}", f"4-point err {plane_err:.1e}"]
        check(worst_box <= 1e-8 and worst_eq <= 1e-8, "constraint violated")
        check(worst_kkt <= 1e-3, "KKT")
        check(worst_margin >= -1e-6, "random feasible point beats SMO")
        check(plane_err < 1e-2, "4-point hyperplane")


# -- 5. protocol invariants -------------------------------------------------------

def test_protocol_invariants(monkeypatch):
    with criterion("protocol invariants (stratification +-1, scaler 1e-9, no leakage, "
                   "39-point RFE)") as d:
        rng = np.random.default_rng(11)
        worst = 0.0
        for seed in range(20):
            y = rng.integers(0, 6, rng.integers(60, 400))
            split = dataset.stratified_split(y, (0.8, 0.2), seed)
            for c in np.unique(y):
                n_c = np.sum(y == c)
                worst = max(worst, abs(np.sum(y[split.test] == c) - 0.2 * n_c))
                for f in dataset.kfold(y, 5, seed):
                    worst = max(worst, abs(np.sum(y[f.test] == c) - n_c / 5))
        d.append(f"max stratification deviation {worst:.2f} samples")
        check(worst <= 1, "class proportions not preserved")

        X, y = informative_table(n=200, seed=5)
        X = X * rng.uniform(0.1, 100, X.shape[1]) + rng.uniform(-50, 50, X.shape[1])
        split = dataset.stratified_split(y, (0.8, 0.2), 0)
        Z = preprocess.fit(X[split.train]).transform(X[split.train])
        mean_err = np.abs(Z.mean(axis=0)).max()
        std_err = np.abs(Z.std(axis=0) - 1).max()
        d.append(f"scaled |mean| {mean_err:.1e}, |std-1| {std_err:.1e}")
        check(mean_err < 1e-9 and std_err < 1e-9, "scaler")

        # Leakage: every array a fit routine sees must avoid the held-out rows.
        Xtr, ytr = X[split.train], y[split.train]
        test_rows = {r.tobytes() for r in X[split.test]}
        fitted = []
        real_fit, real_scaler_fit = S.fit_model, preprocess.fit

        def spy_fit(family, cfg, Xf, *a, **k):
            fitted.append(("model", Xf))
            return real_fit(family, cfg, Xf, *a, **k)

        def spy_scaler(rows):
            fitted.append(("scaler", np.asarray(rows)))
            return real_scaler_fit(rows)

        monkeypatch.setattr(S, "fit_model", spy_fit)
        monkeypatch.setattr(S.preprocess, "fit", spy_scaler)
        folds = dataset.kfold(ytr, 5, 0)
        fold_sets = [{r.tobytes() for r in Xtr[f.test]} for f in folds]
        calls = []
        S.grid_search(S.GridSpec("svm", {"C": [1.0, 10.0], "kernel": ["rbf"]}), Xtr, ytr,
                      "binary", 5, 0, on_fit=lambda rows: calls.append(rows))
        monkeypatch.undo()
        scaler_arrays = [a for kind, a in fitted if kind == "scaler"]
        leaks = 0
        for i, arr in enumerate(scaler_arrays):
            seen = {r.tobytes() for r in arr}
            leaks += len(seen & test_rows) + len(seen & fold_sets[i % 5])
        for rows, f in zip(calls, folds * 2):
            leaks += len(set(rows.tolist()) & set(f.test.tolist()))
        d.append(f"{len(fitted)} fits inspected, {leaks} leaked rows")
        check(len(scaler_arrays) == 10 and leaks == 0, "held-out rows reached a fit")

        names = list(features.FEATURE_NAMES)
        curve = S.rfe("lr", models.LRConfig(), Xtr, ytr, names, "binary", 5, 0)
        full = float(np.mean(S.cross_validate("lr", models.LRConfig(), Xtr, ytr, "binary",
                                              dataset.kfold(ytr, 5, 0))))
        d.append(f"RFE points {len(curve.points)}, point-39 {curve.at(39).cv_accuracy:.4f} "
                 f"vs full {full:.4f}")
        check(len(curve.points) == 39 and curve.at(39).cv_accuracy == full, "RFE curve")


# -- 6. synthetic end-to-end ----------------------------------------------------

def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "artforensics.cli", *map(str, args)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_synthetic_end_to_end(tmp_path):
    with criterion("synthetic end-to-end: SVM-RBF via CLI >= 0.95 in < 5 min") as d:
        t0 = time.perf_counter()
        write_two_class_set(tmp_path / "imgs", per_class=200, side=64, seed=0)
        workers = min(4, os.cpu_count() or 1)
        _cli("extract", tmp_path / "imgs", "--out", tmp_path / "f.csv", "--workers", workers)
        _cli("train", "--features", tmp_path / "f.csv", "--family", "svm", "--task", "binary",
             "--param", "C=10", "--param", "gamma=auto", "--param", "kernel=rbf",
             "--model", tmp_path / "m.json", "--report-dir", tmp_path / "report")
        report = json.loads((tmp_path / "report" / "report.json").read_text())
        elapsed = time.perf_counter() - t0
        acc = report["test_accuracy"]
        d += [f"test accuracy {acc:.4f} on {sum(map(sum, report['confusion']['counts']))} images",
              f"{elapsed:.0f} s"]
        check(acc >= 0.95, "accuracy below 0.95")
        check(elapsed < 300, "too slow")


def test_rfe_recovers_informative_features():
    with criterion("RFE keeps the 3 informative of 39 features in >= 9/10 seeds") as d:
        names = [f"informative_{i}" for i in range(3)] + [f"noise_{i}" for i in range(36)]
        hits = 0
        for seed in range(10):
            X, y = informative_table(n=300, seed=seed)
            curve = S.rfe("lr", models.LRConfig(), X, y, names, "binary", 5, seed)
            hits += set(curve.at(3).kept_features) == set(names[:3])
        d.append(f"{hits}/10 seeds")
        check(hits >= 9, "informative features dropped")


# -- 7. structural figures -----------------------------------------------------

EXPECTED_GRIDS = {
    "lr": {"C": [0.2, 0.3, 0.5, 0.7, 0.8, 1], "solver": ["lbfgs", "saga", "liblinear"],
           "penalty": ["l2", "elastincnet"], "max_iter": [50, 80, 100, 120, 200, 500, 1000]},
    "svm": {"C": [0.1, 1, 10], "gamma": [0.1, 1, 10, "scale", "auto"],
            "kernel": ["linear", "rbf"]},
    "mlp": {"hidden_layer_sizes": [(50,), (100,), (50, 50)],
            "activation": ["identity", "logistic", "relu"], "alpha": [0.0001, 0.05],
            "random_state": [30, 40, 50], "solver": ["adam"], "learning_rate_init": [0.0001],
            "max_iter": [200, 300, 1000]},
    "cnn": {"layers": [6, 7, 8, 9, 10, 11], "activation": ["softmax", "sigmoid"],
            "dropout_rate": [0.1, 0.2, 0.3, 0.4, 0.5], "optimization": ["Adam"],
            "learning_rate": [0.001]},
}


def test_structural_figures():
    with criterion("structural: grids (SVM 30 cells), CNN 11/9 layer stacks, ln 6 initial "
                   "loss within 0.15") as d:
        check(S.PUBLISHED_GRIDS == EXPECTED_GRIDS, "grid values differ")
        n_svm = len(S.GridSpec.published("svm").cells())
        lr_cells = S.GridSpec.published("lr").cells()
        n_lr = len(lr_cells)
        n_skip = 0
        for params in lr_cells:
            try:
                S.make_config("lr", params)
            except S.SkippedConfig:
                n_skip += 1
        d.append(f"SVM {n_svm} cells, LR {n_lr} cells ({n_skip} skipped)")
        check(n_svm == 30 and n_lr == 252 and n_skip == 126, "grid sizes")

        def census(m):
            kinds = [layer.kind for layer in m.layers]
            return {k: kinds.count(k) for k in sorted(set(kinds))}

        b = neural.build_cnn(neural.CNNConfig(architecture="binary11"))
        m = neural.build_cnn(neural.CNNConfig(architecture="multiclass9", n_classes=6))
        check(census(b) == {"conv2d": 3, "dense": 2, "dropout": 1, "flatten": 1, "maxpool2d": 3,
                            "rescaling": 1} and len(b) == 11, f"binary11 {census(b)}")
        check(census(m) == {"conv2d": 2, "dense": 2, "dropout": 1, "flatten": 1, "maxpool2d": 2,
                            "rescaling": 1} and len(m) == 9, f"multiclass9 {census(m)}")
        check(all(layer.l2 > 0 for layer in m.layers[1:4:2]) and m.layers[7].l2 > 0
              and m.layers[8].l2 == 0, "multiclass9 L2 placement")
        check(b.layers[-1].units == 1 and m.layers[-1].units == 6, "output units")
        d.append("layers 11 / 9")

        rng = np.random.default_rng(0)
        x = rng.uniform(0, 255, (60, 64, 64, 3))
        y = np.repeat(np.arange(6), 10)
        gaps = []
        for head in ("sigmoid", "softmax"):
            cfg = neural.CNNConfig(architecture="multiclass9", n_classes=6, final_activation=head)
            loss, _ = neural.evaluate_cnn(neural.build_cnn(cfg), x, y, include_penalty=False)
            gaps.append(abs(loss - np.log(6)))
        d.append("epoch-0 |loss - ln 6| " + ", ".join(f"{g:.3f}" for g in gaps))
        check(max(gaps) < 0.15, "initial loss far from ln 6")


# -- 8. four-class reproduction (off by default) ---------------------------------

FOUR_CLASS_ENV = "ARTFORENSICS_DATA"


@pytest.mark.slow
def test_four_class_reproduction(tmp_path):
    root = os.environ.get(FOUR_CLASS_ENV)
    if not root:
        RESULTS.append(("four-class reproduction (>= 0.92, off by default)", None,
                        f"skipped: set {FOUR_CLASS_ENV} to the four-class image root"))
        pytest.skip(f"set {FOUR_CLASS_ENV} to run")
    with criterion("four-class reproduction: binary SVM-RBF C=10 gamma=auto >= 0.92") as d:
        feats = Path(os.environ.get("ARTFORENSICS_FEATURES", tmp_path / "four.csv"))
        _cli("extract", root, "--out", feats, "--workers", os.cpu_count() or 1)
        _cli("train", "--features", feats, "--family", "svm", "--grid", "best",
             "--report-dir", tmp_path / "report")
        report = json.loads((tmp_path / "report" / "report.json").read_text())
        d.append(f"test accuracy {report['test_accuracy']:.4f}")
        # Informational: where the multiclass errors fall.
        _cli("train", "--features", feats, "--family", "svm", "--task", "multiclass",
             "--grid", "best", "--report-dir", tmp_path / "multi")
        multi = json.loads((tmp_path / "multi" / "report.json").read_text())
        cm = ConfusionMatrix(tuple(multi["confusion"]["labels"]),
                             np.array(multi["confusion"]["counts"]))
        d.append(f"multiclass errors by provenance {provenance_errors(cm)}")
        check(report["test_accuracy"] >= 0.92, "below 0.92")
