import json
import subprocess
import sys

import pytest

# configs reproducing the bound-verification acceptance inputs (criteria
# 5-8) plus the remaining CSV-emitting experiments; the primary package is
# driven only through its CLI
CONFIGS = {
    "mixing-scan": {
        "experiment": "mixing-scan", "seed": 0,
        "potential": {"kind": "quadratic", "curvature": 1.0},
        "grid": {"d": [1, 2, 10], "T": [0.25], "h": [0.05],
                 "k": list(range(0, 201)), "q": [2.0]},
        "init": {"mean": 1.0, "var": 1.5},
    },
    "bias-scan": {
        "experiment": "bias-scan", "seed": 0,
        "potential": {"kind": "quadratic", "curvature": 1.0},
        "grid": {"d": [1], "T": [0.2], "h": [0.2, 0.1, 0.05, 0.025],
                 "q": [2.0]},
    },
    "renyi-scan": {
        "experiment": "renyi-scan", "seed": 0,
        "potential": {"kind": "quadratic", "curvature": 1.0},
        "grid": {"d": [1], "T": [0.25], "h": [0.0125], "q": [2.0],
                 "k": list(range(380, 680, 10))},
        "init": {"mean": 1.0, "var": 1.5},
    },
    "mi-scan": {
        "experiment": "mi-scan", "seed": 0,
        "potential": {"kind": "quadratic", "curvature": 1.0},
        "grid": {"d": [1, 2], "T": [0.2], "h": [0.05],
                 "k": list(range(1, 101))},
        "init": {"mean": 0.0, "var": 2.0},
    },
    "ula-scan": {
        "experiment": "ula-scan", "seed": 0,
        "potential": {"kind": "quadratic", "curvature": 1.0},
        "grid": {"eta": [0.1, 0.05, 0.025, 0.0125], "d": [1]},
        "ula": {"x": 1.0, "y": 1.0},
    },
    "couple-verify": {
        "experiment": "couple-verify", "seed": 0,
        "potential": {"kind": "logcosh", "c": 0.5},
        "couple": {"samples": 100, "dim": 2, "T": 0.2, "h": 0.05},
    },
    "figure1": {
        "experiment": "figure1",
        "figure1": {"weights": [0.99, 0.01], "centers": [0.0, 10.0]},
    },
}


@pytest.fixture(scope="session")
def acceptance_outputs(tmp_path_factory):
    """Run every acceptance experiment once through the primary CLI."""
    root = tmp_path_factory.mktemp("acceptance-csv")
    outputs = {}
    for name, cfg in CONFIGS.items():
        cfg_path = root / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        out_dir = root / name
        proc = subprocess.run(
            [sys.executable, "-m", "couplelab.cli", cfg["experiment"],
             "--config", str(cfg_path), "--out", str(out_dir)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr + proc.stdout
        outputs[name] = out_dir
    return outputs
