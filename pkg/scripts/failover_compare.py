"""Hot-standby failover versus BMCA re-election after a grandmaster failure.

    python3 scripts/failover_compare.py --seeds 0..9
"""

import argparse

from tsnsim.cli import _seed_range
from tsnsim.metrics import failover_report
from tsnsim.scenario import load_scenario
from tsnsim.sim import run
from tsnsim.timebase import MS, NS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=_seed_range, default=range(0, 5), metavar="A..B")
    args = ap.parse_args()

    print("scenario              seed  switch_latency_ms  discontinuity_ns  gap_ms")
    for name in ("hotstandby_failover.json", "bmca_baseline.json"):
        sc = load_scenario(name)
        fault = next(f for f in sc.faults if f.kind.value == "GmHardFailure")
        for seed in args.seeds:
            rep = failover_report(run(sc, seed=seed), fault)
            lat = "-" if rep.latency is None else f"{rep.latency / MS:.1f}"
            print(f"{sc.name:<20} {seed:5d}  {lat:>17}  {rep.discontinuity / NS:16.1f}  {rep.gap / MS:6.1f}")


if __name__ == "__main__":
    main()
