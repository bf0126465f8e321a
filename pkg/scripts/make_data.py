"""Write the bundled example CSVs under data/."""
from pathlib import Path

import numpy as np

from fairscope import AggregateInputs, ConfusionSet, emit_confusions, emit_inputs

DATA = Path(__file__).resolve().parent.parent / "data"

# Two-population experiments: group -> (weight, true positive rate, predicted positive rate), in percent.
EXPERIMENTS = {
    "exp1": {"Female": (33.30, 10.88, 8.45), "Male": (66.70, 29.98, 27.21)},
    "exp2": {"AIE": (0.98, 11.95, 6.29), "API": (2.95, 27.71, 23.33), "Black": (9.59, 11.47, 9.48),
             "Other": (0.83, 18.52, 7.41), "White": (85.66, 25.03, 22.47)},
    "exp3": {"Female": (33.30, 10.88, 11.20), "Male": (66.70, 29.98, 35.11)},
    "exp4": {"AIE": (0.98, 11.95, 7.55), "API": (2.95, 27.71, 27.92), "Black": (9.59, 11.47, 13.45),
             "Other": (0.83, 18.52, 14.81), "White": (85.66, 25.03, 29.00)},
    "exp5": {"Afr-Am": (59.01, 54.57, 51.56), "Cauc": (40.99, 37.96, 28.15)},
    "exp6": {"Afr-Am": (59.01, 54.57, 57.30), "Cauc": (40.99, 37.96, 32.91)},
}


def experiment_inputs(name: str) -> AggregateInputs:
    rows = EXPERIMENTS[name]
    w = np.array([v[0] for v in rows.values()])
    pi1 = np.array([v[1] for v in rows.values()]) / 100
    p1 = np.array([v[2] for v in rows.values()]) / 100
    # the source weights are rounded and may not sum to exactly 100
    return AggregateInputs.binary(w / w.sum(), pi1, p1, list(rows))


def main() -> None:
    DATA.mkdir(exist_ok=True)
    for name in EXPERIMENTS:
        (DATA / f"{name}.csv").write_text(emit_inputs(experiment_inputs(name)))
    regions = AggregateInputs.binary([0.5, 0.5], [0.3, 0.7], [0.5, 0.7], ["L", "R"])
    (DATA / "two_regions.csv").write_text(emit_inputs(regions))
    unfair = ConfusionSet.from_arrays([0.5, 0.5], [[0.7, 0.3], [0.3, 0.7]],
                                      [[[5 / 7, 2 / 7], [0, 1]], np.eye(2)], group_ids=["L", "R"])
    (DATA / "two_regions_unfair.csv").write_text(emit_confusions(unfair))
    shared = np.array([[0.65, 0.35], [0.15, 0.85]])
    fair = ConfusionSet.from_arrays([0.5, 0.5], [[0.7, 0.3], [0.3, 0.7]], [shared, shared], group_ids=["L", "R"])
    (DATA / "two_regions_fair.csv").write_text(emit_confusions(fair))


if __name__ == "__main__":
    main()
