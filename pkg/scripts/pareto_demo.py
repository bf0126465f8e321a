"""Lower-bound Pareto curves for a two-label experiment and a synthetic three-label population.

    python3 scripts/pareto_demo.py [--out-dir DIR]

Writes one CSV per curve and prints the points. Three-label values are upper
bounds on the minimum discrepancy with a certified lower bound alongside.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from fairscope import ConfusionSet, error_of, pareto_curve, parse_inputs_csv, unfairness_multiclass_bounds
from fairscope.csvio import emit_pareto, write_atomic


def three_label_example() -> ConfusionSet:
    rng = np.random.default_rng(7)
    w = np.array([0.5, 0.3, 0.2])
    true = rng.dirichlet(np.full(3, 4.0), 3)
    base = np.array([[0.8, 0.15, 0.05], [0.1, 0.75, 0.15], [0.05, 0.2, 0.75]])
    mats = np.array([0.85 * base + 0.15 * rng.dirichlet(np.ones(3), 3) for _ in range(3)])
    return ConfusionSet.from_arrays(w, true, mats, group_ids=["a", "b", "c"])


def show(title: str, curve) -> None:
    print(title)
    print("  beta    unfairness   error      mindisc    lower")
    for p in curve.points:
        print(f"  {p.beta:.3f}   {p.unfairness_lb:.5f}     {p.error_lb:.5f}    {p.mindisc:.5f}    {p.mindisc_lower:.5f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", type=Path, default=Path("."))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    data = Path(__file__).resolve().parent.parent / "data"
    curve = pareto_curve(parse_inputs_csv(data / "exp4.csv"), n_init=11, refine_budget=10, gamma=1e-5)
    show("exp4 (two labels, exact)", curve)
    write_atomic(args.out_dir / "pareto_exp4.csv", emit_pareto(curve))

    cs = three_label_example()
    truth = unfairness_multiclass_bounds(cs)
    print(f"\nthree-label population: actual error {error_of(cs):.5f}, "
          f"unfairness in [{truth.lower:.5f}, {truth.upper:.5f}]")
    curve = pareto_curve(cs.inputs(), n_init=6, refine_budget=3)
    show("three labels (bounds from aggregates only)", curve)
    write_atomic(args.out_dir / "pareto_three_label.csv", emit_pareto(curve))


if __name__ == "__main__":
    main()
