"""Long-run reproduction of the gAL blow-up-time scan (p = 2, q0 in 0.10..0.20).

Usage: python3 scripts/run_table1.py [OUTPUT_JSON]

Points run one at a time from the largest q0 (shortest run) down; the output file
is rewritten after each point so partial results survive interruption. The full
scan takes several hours on one core.
"""
import json
import sys
import time

from galdnls.harness import scan_blowup_q0

REFERENCE = {0.1: 24435, 0.12: 10773, 0.14: 5345, 0.16: 2889, 0.18: 1666, 0.19: 1292, 0.2: 1001}


def main(path="table1.json"):
    results = {}
    for q0 in sorted(REFERENCE, reverse=True):
        t0 = time.time()
        rep = scan_blowup_q0(p=2.0, q0_list=[q0], L=300.0, dt=0.01, t_max=30000.0, sample_every=10000, threads=1)
        t = rep.derived["blowup_t"][f"{q0:g}"]
        ref = REFERENCE[q0]
        results[f"{q0:g}"] = {
            "blowup_t": t,
            "reference": ref,
            "rel_err": None if t is None else (t - ref) / ref,
            "cause": rep.to_dict()["series"][f"q0={q0:g}"]["blowup"],
            "wall_seconds": time.time() - t0,
        }
        times = [results[k]["blowup_t"] for k in sorted(results, key=float)]
        done = len(times) == len(REFERENCE)
        summary = {
            "points": results,
            "monotone_decreasing": (all(x is not None for x in times)
                                    and all(a > b for a, b in zip(times, times[1:]))) if done else None,
        }
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        print(f"q0={q0:g} blowup_t={t} reference={ref}", flush=True)


if __name__ == "__main__":
    main(*sys.argv[1:])
