"""Receiver time error versus chain length, with and without rate-ratio estimation.

    python3 scripts/hop_sweep.py --max-hops 8 --drift 100
"""

import argparse
from dataclasses import replace

from tsnsim.builders import chain
from tsnsim.clock import ClockParams
from tsnsim.metrics import max_abs_error
from tsnsim.scenario import GptpParams, Scenario
from tsnsim.sim import run
from tsnsim.timebase import S, parse_duration


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-hops", type=int, default=8)
    ap.add_argument("--drift", type=float, default=100.0, help="bridge/receiver drift magnitude, ppm (alternating sign)")
    ap.add_argument("--residence", type=parse_duration, default=parse_duration("250us"))
    ap.add_argument("--duration", type=parse_duration, default=parse_duration("30s"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("hops  rate_ratio  max_abs_error_ns")
    for hops in range(1, args.max_hops + 1):
        for rr in (True, False):
            nodes, links = chain(hops, residence=args.residence, gm_clock=ClockParams())
            nodes = tuple(
                n if n.id == 0 else replace(n, clock=ClockParams(
                    drift_ppm=args.drift * (1 if n.id % 2 else -1), jitter_sigma=2_000.0))
                for n in nodes
            )
            sc = Scenario(nodes, links, gptp=GptpParams(rate_ratio=rr), duration=args.duration, seed=args.seed)
            tr = run(sc)
            err = max_abs_error(tr, hops + 1, (2 * S, args.duration))
            print(f"{hops:4d}  {'on' if rr else 'off':>10}  {err / 1000:16.1f}")


if __name__ == "__main__":
    main()
