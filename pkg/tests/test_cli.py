import json

import numpy as np
import pytest

from artforensics import cli
from synth import write_two_class_set


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    write_two_class_set(root / "imgs", per_class=20, side=32, seed=1)
    feats = root / "f.csv"
    assert cli.main(["extract", str(root / "imgs"), "--out", str(feats), "--side", "32",
                     "--seed", "5"]) == 0
    return root, feats


def test_extract_outputs(workspace, capsys):
    root, feats = workspace
    meta = json.loads((root / "f.csv.meta.json").read_text())
    assert meta["seed"] == 5 and meta["extractor"]["side"] == 32
    hist = (root / "f.histograms.csv").read_text().splitlines()
    assert len(hist) == 1 + 39 * 2 * cli.HISTOGRAM_BINS
    assert cli.main(["extract", str(root / "imgs"), "--out", str(feats), "--side", "32"]) == 0
    assert "0 extracted, 40 cached" in capsys.readouterr().out


def test_train_predict_evaluate_info(workspace, capsys, tmp_path):
    root, feats = workspace
    model = tmp_path / "m.json"
    rc = cli.main(["train", "--features", str(feats), "--family", "svm", "--param", "C=1,10",
                   "--param", "kernel=rbf", "--param", "gamma=auto", "--model", str(model),
                   "--report-dir", str(tmp_path / "rep")])
    assert rc == 0
    grid = (tmp_path / "rep" / "grid.csv").read_text().splitlines()
    assert len(grid) == 3
    capsys.readouterr()
    assert cli.main(["predict", "--model", str(model), str(root / "imgs" / "AI-noise")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "path,label,score" and len(lines) == 21
    assert all(line.split(",")[1] in ("human", "ai") for line in lines[1:])
    assert cli.main(["evaluate", "--model", str(model), "--features", str(feats),
                     "--report-dir", str(tmp_path / "ev")]) == 0
    assert cli.main(["info", str(model)]) == 0
    assert "model: svm (binary)" in capsys.readouterr().out


def test_config_file_and_flag_precedence(workspace, tmp_path, capsys):
    _, feats = workspace
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"features = {feats}\nfamily = lr\nparam = C=0.5|max_iter=50\n"
                   f"report_dir = {tmp_path / 'r1'}\n")
    assert cli.main(["--config", str(cfg), "train"]) == 0
    assert '"C": 0.5' in capsys.readouterr().out
    assert cli.main(["--config", str(cfg), "train", "--param", "C=2",
                     "--report-dir", str(tmp_path / "r2")]) == 0
    assert '"C": 2' in capsys.readouterr().out


def test_rfe_with_selection(workspace, tmp_path):
    _, feats = workspace
    model = tmp_path / "r.json"
    assert cli.main(["rfe", "--features", str(feats), "--family", "lr", "--select", "5",
                     "--model", str(model), "--report-dir", str(tmp_path / "rr")]) == 0
    curve = (tmp_path / "rr" / "rfe_curve.csv").read_text().splitlines()
    assert len(curve) == 40 and curve[1].startswith("39,")
    from artforensics.modelio import load_model
    assert len(load_model(model).feature_names) == 5


def test_cnn_train_and_predict(workspace, tmp_path, capsys):
    root, _ = workspace
    model = tmp_path / "cnn.json"
    assert cli.main(["train", "--family", "cnn", "--images", str(root / "imgs"), "--epochs", "1",
                     "--input-side", "24", "--model", str(model),
                     "--report-dir", str(tmp_path / "cn")]) == 0
    assert len((tmp_path / "cn" / "epochs.csv").read_text().splitlines()) == 3
    capsys.readouterr()
    img = root / "imgs" / "human-smooth" / "0000.png"
    assert cli.main(["predict", "--model", str(model), str(img)]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith(str(img))


def test_exit_codes(workspace, tmp_path, capsys):
    root, feats = workspace
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["nonsense"]) == cli.EXIT_USAGE
    assert cli.main(["train", "--family", "bogus"]) == cli.EXIT_USAGE
    assert cli.main(["info"]) == cli.EXIT_USAGE
    assert cli.main(["extract", str(tmp_path / "missing")]) == cli.EXIT_DATA
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert cli.main(["info", str(bad)]) == cli.EXIT_DATA
    # Every row in one class: training cannot proceed.
    lines = feats.read_text().splitlines()
    one = tmp_path / "one.csv"
    one.write_text("\n".join([lines[0]] + [l for l in lines[1:] if ",AI-noise," in l]) + "\n")
    assert cli.main(["train", "--features", str(one), "--report-dir", str(tmp_path / "x")]) == cli.EXIT_TRAINING
    model = tmp_path / "m.json"
    cli.main(["train", "--features", str(feats), "--family", "lr", "--model", str(model),
              "--report-dir", str(tmp_path / "y")])
    broken = tmp_path / "broken.png"
    broken.write_bytes(b"junk")
    assert cli.main(["predict", "--model", str(model), str(broken)]) == cli.EXIT_DATA
    assert "failed" in capsys.readouterr().err


def _grid_rows(path):
    import csv
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_published_grids_through_cli(workspace, tmp_path):
    _, feats = workspace
    assert cli.main(["train", "--features", str(feats), "--family", "svm", "--grid", "published",
                     "--report-dir", str(tmp_path / "svm")]) == 0
    assert len(_grid_rows(tmp_path / "svm" / "grid.csv")) == 30
    assert cli.main(["train", "--features", str(feats), "--family", "lr", "--grid", "published",
                     "--report-dir", str(tmp_path / "lr")]) == 0
    rows = _grid_rows(tmp_path / "lr" / "grid.csv")
    assert len(rows) == 252
    skipped = [r for r in rows if r["status"] == "skipped"]
    assert len(skipped) == 126 and all(r["penalty"] == "elastincnet" for r in skipped)


def test_reports_byte_identical(workspace, tmp_path):
    _, feats = workspace
    for name in ("a", "b"):
        assert cli.main(["train", "--features", str(feats), "--family", "mlp", "--param",
                         "hidden_layer_sizes=(8,)", "--param", "max_iter=20", "--seed", "3",
                         "--report-dir", str(tmp_path / name)]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_predict_directory_equals_per_file(workspace, tmp_path, capsys):
    root, feats = workspace
    model = tmp_path / "m.json"
    cli.main(["train", "--features", str(feats), "--family", "lr", "--model", str(model),
              "--report-dir", str(tmp_path / "r")])
    capsys.readouterr()
    folder = root / "imgs" / "human-smooth"
    cli.main(["predict", "--model", str(model), str(folder)])
    together = capsys.readouterr().out.splitlines()[1:]
    single = []
    for f in sorted(folder.iterdir()):
        cli.main(["predict", "--model", str(model), str(f)])
        single += capsys.readouterr().out.splitlines()[1:]
    assert together == single
    # Overfit check: training images come back with their own label.
    assert sum(line.split(",")[1] == "human" for line in together) >= 18


def test_predict_from_csv_uses_stored_subset(workspace, tmp_path, capsys):
    _, feats = workspace
    model = tmp_path / "sub.json"
    cli.main(["train", "--features", str(feats), "--family", "lr", "--feature-subset",
              "red_mean,edgelen,snr", "--model", str(model), "--report-dir", str(tmp_path / "r")])
    capsys.readouterr()
    assert cli.main(["predict", "--model", str(model), str(feats)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 41


def test_six_by_ten_tree(tmp_path, capsys):
    from PIL import Image
    rng = np.random.default_rng(0)
    for c in range(6):
        d = tmp_path / "tree" / f"{'AI' if c % 2 else 'Human'}-class{c}"
        d.mkdir(parents=True)
        for i in range(10):
            Image.fromarray(rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)).save(d / f"{i}.png")
    out = tmp_path / "six.csv"
    args = ["extract", str(tmp_path / "tree"), "--out", str(out), "--side", "16"]
    assert cli.main(args) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 61 and all(len(r.split(",")) == 42 for r in rows)
    capsys.readouterr()
    assert cli.main(args) == 0
    assert capsys.readouterr().out.startswith("0 extracted, 60 cached")
