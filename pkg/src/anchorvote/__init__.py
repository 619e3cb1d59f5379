"""Nearest-report voting on the simplex with anchored preferences."""
from anchorvote.bounds import (binom_tail, borda_bounds, plurality_bounds, rule_bounds,
                               tightening_report, w_topk_condition)
from anchorvote.density import (DensityModel, ReportDistribution, exact_measure_m3,
                                level_set_measure, report_distribution, sample_profile)
from anchorvote.errors import (AnchorVoteError, InvalidInputError, ResourceLimitError,
                               UnsupportedError)
from anchorvote.kernels import BACKEND
from anchorvote.rules import VotingRule, make_rule, winners
from anchorvote.simplex import (AnchorParams, ReportMenu, SimplexPoint, anchor_menu,
                                anchored_utility, nearest_report, ordinal_menu, phi,
                                plurality_menu, veto_menu)
from anchorvote.welfare import (decrease_probability, expected_delta_sw, outcome_distribution,
                                social_welfare)

__version__ = "0.1.0"

__all__ = [
    "AnchorParams", "AnchorVoteError", "BACKEND", "DensityModel", "InvalidInputError",
    "ReportDistribution", "ReportMenu", "ResourceLimitError", "SimplexPoint",
    "UnsupportedError", "VotingRule", "anchor_menu", "anchored_utility", "binom_tail",
    "borda_bounds", "decrease_probability", "exact_measure_m3", "expected_delta_sw",
    "level_set_measure", "make_rule", "nearest_report", "ordinal_menu", "outcome_distribution",
    "phi", "plurality_bounds", "plurality_menu", "report_distribution", "rule_bounds",
    "sample_profile", "social_welfare", "tightening_report", "veto_menu", "w_topk_condition",
    "winners",
]
