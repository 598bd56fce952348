#!/usr/bin/env python3
"""Integrated network against CS-only and SAT-only, written to Output/baselines.csv."""
from pathlib import Path
import sys

try:
    from leomec.CLI.leomec import run_cli
except ImportError:  # pragma: no cover - local repo execution fallback
    sys.modules.pop("leomec", None)
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from leomec.CLI.leomec import run_cli


if __name__ == "__main__":
    raise SystemExit(run_cli(["baselines", "--out", "Output/baselines.csv"] + sys.argv[1:]))
