import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def image_tree(tmp_path):
    """Two small classes of random PNGs plus one undecodable file."""
    rng = np.random.default_rng(0)
    root = tmp_path / "data"
    for cls in ("human-a", "AI-b"):
        (root / cls).mkdir(parents=True)
        for i in range(6):
            img = rng.integers(0, 256, (24, 20, 3), dtype=np.uint8)
            Image.fromarray(img).save(root / cls / f"{i}.png")
    (root / "AI-b" / "broken.png").write_bytes(b"garbage")
    (root / "AI-b" / "notes.txt").write_text("ignored")
    return root


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in mod.RESULTS:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
