#!/usr/bin/env python3
"""Delay versus N_s for three altitudes, written to Output/altitude_sweep.csv."""
from pathlib import Path
import sys

try:
    from leomec.CLI.leomec import run_cli
except ImportError:  # pragma: no cover - local repo execution fallback
    sys.modules.pop("leomec", None)
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from leomec.CLI.leomec import run_cli


if __name__ == "__main__":
    raise SystemExit(
        run_cli(
            [
                "analytic",
                "--config", str(Path(__file__).resolve().parents[1] / "configs" / "default.toml"),
                "--sweep", "n_sats",
                "--values", "200,500,800,1000,1500,2000,2500",
                "--series", "altitude_km",
                "--series-values", "500,800,1000",
                "--out", "Output/altitude_sweep.csv",
            ]
            + sys.argv[1:]
        )
    )
