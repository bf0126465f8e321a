"""Fairness and accuracy bounds for classifiers audited from aggregate statistics."""
__version__ = "0.1.0"

from .audit import (
    BetaInterval,
    CapBound,
    ParetoCurve,
    ParetoPoint,
    beta_sensitivity,
    bound_under_error_cap,
    bound_under_unfairness_cap,
    pareto_curve,
    solve_discrepancy,
)
from .core import (
    AggregateInputs,
    BaselineMatrix,
    ConfusionMatrix,
    ConfusionSet,
    GroupStats,
    LabelSpace,
    Onesided,
    condition_onesided,
    error_of,
    implied_pred_props,
    is_fair,
    validate_inputs,
)
from .csvio import emit_confusions, emit_inputs, parse_confusions_csv, parse_inputs_csv
from .discrepancy import DiscrepancyQuery, DiscrepancySolution
from .fair_lp import FairErrorResult, fair_error_lower_bound
from .mindisc_binary import mindisc0_closed_form, mindisc_binary
from .mindisc_multiclass import SlpParams, mindisc_multiclass, mindisc_multiclass_lower, mindisc_multiclass_upper
from .scalarfuncs import eta, tau
from .unfairness import (
    LabelMapping,
    UnfairnessResult,
    apply_label_mapping,
    unfairness_binary_exact,
    unfairness_multiclass_bounds,
)
