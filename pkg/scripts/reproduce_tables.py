"""Recompute the two-population minima and beta plateaus from the bundled inputs.

    python3 scripts/reproduce_tables.py [--rounding N]

With ``--rounding N`` each minimum is also recomputed on N random
perturbations of the inputs within half a unit of their fourth decimal
(0.005 percentage points), plus the all-low and all-high corners, to show how
much of any mismatch is explained by rounding of the inputs alone.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))
from make_data import EXPERIMENTS  # noqa: E402

from fairscope import AggregateInputs, DiscrepancyQuery, beta_sensitivity, condition_onesided, mindisc_binary  # noqa: E402

GAMMA = 1e-5
HALF_UNIT = 5e-5


def _inputs(w, pi1, p1, ids) -> AggregateInputs:
    return AggregateInputs.binary(w / w.sum(), np.clip(pi1, 0, 1), np.clip(p1, 0, 1), ids)


def _minima(inputs) -> tuple[float, float]:
    return (mindisc_binary(inputs, DiscrepancyQuery(1.0, GAMMA)).value,
            mindisc_binary(inputs, DiscrepancyQuery(0.0, GAMMA)).value)


def rounding_range(name: str, n: int, rng) -> tuple[tuple[float, float], tuple[float, float]]:
    rows = EXPERIMENTS[name]
    ids = list(rows)
    w = np.array([v[0] for v in rows.values()]) / 100
    pi1 = np.array([v[1] for v in rows.values()]) / 100
    p1 = np.array([v[2] for v in rows.values()]) / 100
    shifts = [np.full((3, len(ids)), s) for s in (-1.0, 1.0)]
    shifts += [s * np.array([1, 1, -1])[:, None] for s in (-1.0, 1.0)]
    shifts += [rng.uniform(-1, 1, (3, len(ids))) for _ in range(n)]
    vals = np.array([_minima(_inputs(w + HALF_UNIT * d[0], pi1 + HALF_UNIT * d[1], p1 + HALF_UNIT * d[2], ids))
                     for d in shifts])
    return (vals[:, 0].min(), vals[:, 0].max()), (vals[:, 1].min(), vals[:, 1].max())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rounding", type=int, default=0, help="random perturbations per experiment")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    data = Path(__file__).resolve().parent.parent / "data"
    from fairscope import parse_inputs_csv

    print("exp   condition   min unfairness  min error   beta matters")
    for name in EXPERIMENTS:
        inputs = parse_inputs_csv(data / f"{name}.csv")
        m1, m0 = _minima(inputs)
        plateaus = beta_sensitivity(inputs, gamma=GAMMA, merge_tol=1e-4)
        cond = condition_onesided(inputs).kind.value
        print(f"{name}  {cond:<10}  {100 * m1:8.4f}%     {100 * m0:8.4f}%   {'yes' if len(plateaus) > 1 else 'no'}")
        if args.rounding:
            (u_lo, u_hi), (e_lo, e_hi) = rounding_range(name, args.rounding, rng)
            print(f"      inputs +-0.005pp: unfairness [{100 * u_lo:.4f}, {100 * u_hi:.4f}]%, "
                  f"error [{100 * e_lo:.4f}, {100 * e_hi:.4f}]%")
        if len(plateaus) > 1:
            for p in plateaus:
                print(f"      beta {p.beta_lo:.2f}-{p.beta_hi:.2f}: unfairness {100 * p.unfairness:.4f}%, "
                      f"error {100 * p.error:.4f}%")


if __name__ == "__main__":
    main()
