"""Command-line front end: solve, compare, simulate, validate.

Reports are comma-separated tables (one header line, integer counts, times
with six decimals) whose counters come straight from the library's DpStats.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from .dp import LP_MODES, DpConfig, DpStats, dp_update
from .lp import LpError
from .model import ModelError, PomdpModel, parse_pomdp
from .solver import SolveConfig, initial_value_function, simulate, value_iterate
from .vectorset import VectorSet, read_alpha_file, value_at, write_alpha_file

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERATIONS = 2
EXIT_VARIANT_DISAGREEMENT = 3

CLI_VARIANTS = ("plain_ip", "restricted_region_ip", "improved")
DEFAULT_COMPARE = ("plain_ip", "restricted_region_ip",
                   "improved:full", "improved:reduced", "improved:reformulated")

REPORT_HEADER = ("variant,iteration,vectors_in,vectors_out,csp_lp_count,"
                 "csp_constraint_rows,harvested_without_lp,"
                 "neighbor_step1_lps,neighbor_step2_lps,total_lp_count,"
                 "wall_time,model_digest")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:12]


def _load_model(path: str) -> PomdpModel:
    return parse_pomdp(Path(path).read_text())


def _report_row(label: str, iteration: int, stats: DpStats, digest: str) -> str:
    return (f"{label},{iteration},{stats.vectors_in},{stats.vectors_out},"
            f"{stats.csp.lp_count},{stats.csp.total_constraint_rows},"
            f"{stats.csp.harvested_without_lp},{stats.neighbor_step1_lps},"
            f"{stats.neighbor_step2_lps},{stats.total_lp_count},"
            f"{stats.wall_time:.6f},{digest}")


def _parse_variant(label: str) -> DpConfig:
    """'improved:reduced' / 'plain_ip' -> DpConfig; raises ValueError."""
    name, _, mode = label.partition(":")
    if name not in CLI_VARIANTS:
        raise ValueError(f"unknown variant {name!r}; choose from {CLI_VARIANTS}")
    if mode and name != "improved":
        raise ValueError(f"lp-mode suffix only applies to 'improved', got {label!r}")
    if mode and mode not in LP_MODES:
        raise ValueError(f"unknown lp-mode {mode!r}; choose from {LP_MODES}")
    return DpConfig(variant=name, lp_mode=mode or "reformulated")


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", default="improved", choices=CLI_VARIANTS,
                   help="pruning variant (default: improved)")
    p.add_argument("--lp-mode", default="reformulated", choices=LP_MODES,
                   help="LP formulation for the improved variant")
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="Bellman-residual stopping threshold")
    p.add_argument("--max-iters", type=int, default=1000,
                   help="iteration cap for value iteration")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (simulation)")
    p.add_argument("--threads", type=int, default=1,
                   help="reserved; never changes emitted counts")
    p.add_argument("--output", default=".", metavar="DIR",
                   help="directory for emitted files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ippomdp",
        description="Exact POMDP value iteration via incremental pruning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a model to convergence")
    p_solve.add_argument("model")
    _add_shared_flags(p_solve)

    p_cmp = sub.add_parser("compare", help="run several variants side by side")
    p_cmp.add_argument("model")
    p_cmp.add_argument("--iterations", type=int, default=20)
    p_cmp.add_argument("--variants", default=",".join(DEFAULT_COMPARE),
                       help="comma list; 'improved' may carry ':<lp-mode>'")
    _add_shared_flags(p_cmp)

    p_sim = sub.add_parser("simulate", help="roll out a stored policy")
    p_sim.add_argument("model")
    p_sim.add_argument("alpha", help="alpha-vector file from 'solve'")
    p_sim.add_argument("--episodes", type=int, default=100)
    p_sim.add_argument("--horizon", type=int, default=100)
    _add_shared_flags(p_sim)

    p_val = sub.add_parser("validate", help="parse a model and check invariants")
    p_val.add_argument("model")
    _add_shared_flags(p_val)
    return parser


def cmd_solve(args) -> int:
    model = _load_model(args.model)
    cfg = SolveConfig(epsilon=args.epsilon, max_iterations=args.max_iters,
                      dp=DpConfig(variant=args.variant, lp_mode=args.lp_mode))
    result = value_iterate(model, cfg)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.model).stem
    alpha_path = out_dir / f"{stem}.alpha"
    write_alpha_file(result.value_function, alpha_path)
    digest = _digest(Path(args.model))
    label = (args.variant if args.variant != "improved"
             else f"improved:{args.lp_mode}")
    report_path = out_dir / f"{stem}.report.csv"
    lines = [REPORT_HEADER]
    for i, stats in enumerate(result.per_iteration_stats, start=1):
        lines.append(_report_row(label, i, stats, digest))
    report_path.write_text("\n".join(lines) + "\n")
    status = "converged" if result.converged else "max-iterations"
    print(f"{status} after {result.iterations_run} iterations; "
          f"|V| = {len(result.value_function)}; "
          f"final residual = {result.residual_history[-1]:.6g}")
    print(f"wrote {alpha_path} and {report_path}")
    return EXIT_OK if result.converged else EXIT_MAX_ITERATIONS


def cmd_compare(args) -> int:
    if args.iterations < 1:
        raise ValueError("--iterations must be >= 1")
    model = _load_model(args.model)
    labels = [v.strip() for v in args.variants.split(",") if v.strip()]
    configs = [(label, _parse_variant(label)) for label in labels]
    digest = _digest(Path(args.model))
    rows = []
    counts: dict[str, list[int]] = {}
    for label, dp_cfg in configs:
        V = initial_value_function(model)
        per_iter = []
        for it in range(1, args.iterations + 1):
            V, stats = dp_update(V, model, dp_cfg)
            per_iter.append(len(V))
            rows.append(_report_row(label, it, stats, digest))
        counts[label] = per_iter
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"{Path(args.model).stem}.compare.csv"
    report_path.write_text("\n".join([REPORT_HEADER] + rows) + "\n")
    print(f"wrote {report_path}")
    reference_label = labels[0]
    reference = counts[reference_label]
    for label, per_iter in counts.items():
        if per_iter != reference:
            print(f"CORRECTNESS ALARM: vector counts disagree: "
                  f"{reference_label}={reference} vs {label}={per_iter}",
                  file=sys.stderr)
            return EXIT_VARIANT_DISAGREEMENT
    print(f"vector counts agree across {len(labels)} variants: {reference}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    V = read_alpha_file(args.alpha)
    if V.dim != model.num_states:
        raise ModelError(
            f"alpha file has dimension {V.dim}, model has {model.num_states} states")
    if args.episodes < 1:
        raise ValueError("--episodes must be >= 1")
    b0 = np.full(model.num_states, 1.0 / model.num_states)
    returns = []
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["episode,discounted_return"]
    for ep in range(args.episodes):
        _, ret = simulate(model, V, b0, args.horizon, seed=args.seed + ep)
        returns.append(ret)
        lines.append(f"{ep},{ret:.6f}")
    path = out_dir / f"{Path(args.model).stem}.episodes.csv"
    path.write_text("\n".join(lines) + "\n")
    mean = float(np.mean(returns))
    stderr = (float(np.std(returns, ddof=1)) / math.sqrt(len(returns))
              if len(returns) > 1 else 0.0)
    predicted = value_at(V, b0)[0]
    print(f"episodes={args.episodes} horizon={args.horizon} seed={args.seed}")
    print(f"mean return = {mean:.6f}  stderr = {stderr:.6f}  "
          f"value at start belief = {predicted:.6f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        model = _load_model(args.model)
    except ModelError as exc:
        print(f"INVALID: {exc}")
        return EXIT_ERROR
    print(f"ok: {len(model.state_names)} states, {len(model.action_names)} "
          f"actions, {len(model.observation_names)} observations, "
          f"discount {model.discount}")
    return EXIT_OK


_COMMANDS = {"solve": cmd_solve, "compare": cmd_compare,
             "simulate": cmd_simulate, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ModelError, LpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
