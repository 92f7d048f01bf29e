#!/usr/bin/env python3
"""Single-thruster-failure studies: re-solve the reconfigured policies for
each shipped failure scenario and simulate the 600 s maneuvers."""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

CASES = [("fault_case1", 5), ("fault_case2", 10)]


def sh(*args: str) -> None:
    print("+", " ".join(args), flush=True)
    subprocess.run(args, check=True)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/fault")
    ap.add_argument("--small", action="store_true")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = ROOT / "configs" / ("dp_small.json" if args.small
                              else "dp_fault.json")
    for name, thruster in CASES:
        policies = out / f"policies_u{thruster}"
        sh("satdp", "solve-policy", "--config", str(cfg),
           "--out", str(policies), "--fail", str(thruster))
        sh("satdp", "simulate",
           "--scenario", str(ROOT / "scenarios" / f"{name}.json"),
           "--policies", str(policies), "--out", str(out / name))
    print(f"artifacts in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
