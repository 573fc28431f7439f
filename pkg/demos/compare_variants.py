"""Run every pruning variant side by side on the tiger problem and tabulate
how much linear-programming work each one does.

All variants compute the same value function; the interesting output is the
LP count and average constraint-row columns.  Run from the repository root:

    python3 demos/compare_variants.py [iterations]
"""

import sys
import time
from pathlib import Path

from ippomdp import DpConfig, dp_update, initial_value_function, parse_pomdp

ROOT = Path(__file__).resolve().parent.parent

VARIANTS = [
    ("plain_ip", DpConfig(variant="plain_ip")),
    ("restricted_region_ip", DpConfig(variant="restricted_region_ip")),
    ("improved:full", DpConfig(variant="improved", lp_mode="full")),
    ("improved:reduced", DpConfig(variant="improved", lp_mode="reduced")),
    ("improved:reformulated",
     DpConfig(variant="improved", lp_mode="reformulated")),
]


def main() -> None:
    iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    model = parse_pomdp((ROOT / "models" / "tiger.POMDP").read_text())

    print(f"{iterations} DP updates on the tiger model\n")
    print(f"{'variant':24} {'|V|':>4} {'CSP LPs':>9} {'rows/LP':>8} "
          f"{'harvested':>10} {'total LPs':>10} {'seconds':>8}")

    reference_counts = None
    for label, cfg in VARIANTS:
        V = initial_value_function(model)
        counts = []
        lp_total = rows_total = harvested = all_lps = 0
        t0 = time.perf_counter()
        for _ in range(iterations):
            V, stats = dp_update(V, model, cfg)
            counts.append(len(V))
            lp_total += stats.csp.lp_count
            rows_total += stats.csp.total_constraint_rows
            harvested += stats.csp.harvested_without_lp
            all_lps += stats.total_lp_count
        elapsed = time.perf_counter() - t0
        mean_rows = rows_total / lp_total if lp_total else 0.0
        print(f"{label:24} {len(V):>4} {lp_total:>9} {mean_rows:>8.1f} "
              f"{harvested:>10} {all_lps:>10} {elapsed:>8.2f}")
        if reference_counts is None:
            reference_counts = counts
        elif counts != reference_counts:
            print(f"  WARNING: per-iteration vector counts differ: {counts} "
                  f"vs {reference_counts}")

    print(f"\nper-iteration vector counts (identical for every variant): "
          f"{reference_counts}")


if __name__ == "__main__":
    main()
