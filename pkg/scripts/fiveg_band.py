"""Histogram of receiver time error behind a transparent 5GS bridge.

    python3 scripts/fiveg_band.py --out fiveg_errors.csv
"""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from tsnsim.fiveg import BridgeMode, ErrorModel
from tsnsim.scenario import load_scenario
from tsnsim.sim import run
from tsnsim.timebase import NS, parse_duration


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", choices=[m.value for m in BridgeMode], default=BridgeMode.E2E_TRANSPARENT.value)
    ap.add_argument("--error-model", choices=[m.value for m in ErrorModel], default=ErrorModel.PER_MESSAGE.value)
    ap.add_argument("--duration", type=parse_duration, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--bins", type=int, default=14)
    ap.add_argument("--out", type=Path, help="write the raw trace CSV here")
    args = ap.parse_args()

    sc = load_scenario("fiveg_band.json")
    sc = replace(sc, fiveg=replace(sc.fiveg, mode=BridgeMode(args.mode), error_model=ErrorModel(args.error_model)))
    tr = run(sc, seed=args.seed, until=args.duration)
    if args.out:
        args.out.write_text(tr.to_csv())
    err = np.array([s.error for s in tr.node_samples(3)], dtype=np.int64)
    mag = np.abs(err) / NS
    print(f"{len(err)} syncs  |error| min {mag.min():.3f} ns  max {mag.max():.3f} ns  "
          f"mean {err.mean() / NS:+.3f} ns")
    counts, edges = np.histogram(err / NS, bins=args.bins)
    for c, lo, hi in zip(counts, edges, edges[1:]):
        print(f"[{lo:8.1f}, {hi:8.1f}) ns  {c:6d}  {'#' * int(60 * c / counts.max())}")


if __name__ == "__main__":
    main()
