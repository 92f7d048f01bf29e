#!/usr/bin/env python3
"""End-to-end fully-actuated study: solve policies, tune the surrogate
baseline, run both controllers, and sweep over initial distance.

Writes everything under --out (default out/comparison).  Pass --small for a
desk-check with reduced grids (minutes become seconds; metrics are coarser).
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def sh(*args: str) -> None:
    print("+", " ".join(args), flush=True)
    subprocess.run(args, check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/comparison")
    ap.add_argument("--small", action="store_true",
                    help="use the reduced desk-check solver config")
    ap.add_argument("--budget", type=int, default=60,
                    help="pattern-search evaluation budget for gain tuning")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = ROOT / "configs" / ("dp_small.json" if args.small
                              else "dp_fully_actuated.json")
    scenario = ROOT / "scenarios" / "fully_actuated.json"
    policies = out / "policies"
    gains = out / "gains.json"

    sh("satdp", "solve-policy", "--config", str(cfg), "--out", str(policies))
    sh("satdp", "simulate", "--scenario", str(scenario),
       "--policies", str(policies), "--out", str(out / "dp"))
    sh("satdp", "tune-baseline", "--scenario", str(scenario),
       "--policies", str(policies), "--out", str(gains),
       "--budget", str(args.budget))
    sh("satdp", "simulate", "--scenario", str(scenario),
       "--policies", str(policies), "--gains", str(gains),
       "--controller", "baseline", "--out", str(out / "baseline"))
    sh("satdp", "compare", "--scenario", str(scenario),
       "--policies", str(policies), "--gains", str(gains),
       "--out", str(out))
    sh("satdp", "sweep", "--scenario", str(scenario),
       "--policies", str(policies), "--gains", str(gains),
       "--out", str(out))
    print(f"artifacts in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
