"""Solve the tiger problem end to end and inspect the resulting policy.

Run from the repository root:

    python3 demos/solve_tiger.py
"""

from pathlib import Path

import numpy as np

from ippomdp import (DpConfig, SolveConfig, extract_policy_action,
                     parse_pomdp, simulate, value_at, value_iterate)

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    model = parse_pomdp((ROOT / "models" / "tiger.POMDP").read_text())
    print(f"model: {model.num_states} states, {model.num_actions} actions, "
          f"{model.num_observations} observations, "
          f"discount {model.discount}")

    cfg = SolveConfig(epsilon=1e-3, max_iterations=300,
                      dp=DpConfig(variant="improved",
                                  lp_mode="reformulated"))
    result = value_iterate(model, cfg)
    print(f"\nconverged: {result.converged} after "
          f"{result.iterations_run} iterations "
          f"(final residual {result.residual_history[-1]:.2e})")
    print(f"value function: {len(result.value_function)} vectors")

    print("\nbelief           value      action")
    for left in (0.5, 0.85, 0.15, 0.97, 0.03):
        b = np.array([left, 1.0 - left])
        v = value_at(result.value_function, b)[0]
        a = extract_policy_action(result.value_function, model, b)
        print(f"({left:.2f}, {1 - left:.2f})     {v:8.4f}    "
              f"{model.action_names[a]}")

    print("\nsimulated rollouts from the uniform belief:")
    returns = [simulate(model, result.value_function,
                        np.array([0.5, 0.5]), horizon=200, seed=s)[1]
               for s in range(200)]
    predicted = value_at(result.value_function, np.array([0.5, 0.5]))[0]
    print(f"mean discounted return over 200 episodes: "
          f"{np.mean(returns):.3f} +/- "
          f"{np.std(returns) / np.sqrt(len(returns)):.3f} "
          f"(value function predicts {predicted:.3f})")


if __name__ == "__main__":
    main()
