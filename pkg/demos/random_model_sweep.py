"""Certify the fast pruning paths against the brute-force oracle on a sweep
of random models.

For each seeded random POMDP this runs three DP updates with every variant
and checks that all of them produce exactly the value-vector set the
exhaustive oracle produces.  Run from the repository root:

    python3 demos/random_model_sweep.py [num_models]
"""

import sys

import numpy as np

from ippomdp import (DpConfig, RandomModelSpec, dp_update,
                     exhaustive_dp_update, initial_value_function,
                     random_pomdp)

VARIANTS = [
    ("plain_ip", DpConfig(variant="plain_ip")),
    ("restricted_region_ip", DpConfig(variant="restricted_region_ip")),
    ("improved:full", DpConfig(variant="improved", lp_mode="full")),
    ("improved:reduced", DpConfig(variant="improved", lp_mode="reduced")),
    ("improved:reformulated",
     DpConfig(variant="improved", lp_mode="reformulated")),
]

SIZES = [(2, 2, 2), (3, 2, 2), (2, 3, 2), (3, 2, 3), (4, 2, 2), (3, 3, 2)]


def sorted_matrix(V):
    vals = V.matrix()
    return vals[np.lexsort(vals.T[::-1])]


def main() -> None:
    num_models = int(sys.argv[1]) if len(sys.argv) > 1 else 30
    failures = 0
    for seed in range(num_models):
        n, na, no = SIZES[seed % len(SIZES)]
        spec = RandomModelSpec(n, na, no, seed=seed,
                               sparsity=0.3 if seed % 4 == 3 else 0.0)
        model = random_pomdp(spec)
        Vo = initial_value_function(model)
        for _ in range(3):
            Vo = exhaustive_dp_update(Vo, model)
        gold = sorted_matrix(Vo)
        verdicts = []
        for label, cfg in VARIANTS:
            V = initial_value_function(model)
            for _ in range(3):
                V, _ = dp_update(V, model, cfg)
            got = sorted_matrix(V)
            ok = got.shape == gold.shape and np.allclose(got, gold, atol=1e-6)
            verdicts.append(ok)
            if not ok:
                failures += 1
                print(f"  MISMATCH seed={seed} variant={label}: "
                      f"{got.shape[0]} vs {gold.shape[0]} vectors")
        mark = "ok" if all(verdicts) else "FAIL"
        print(f"seed {seed:3d}  ({n} states, {na} actions, {no} obs)  "
              f"|V3| = {gold.shape[0]:3d}  {mark}")
    print(f"\n{num_models} models checked, {failures} failures")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
