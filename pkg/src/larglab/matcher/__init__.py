"""Matching verifiers, target constructions and the back-and-forth engine."""
from .checks import (
    Check,
    MatchingReport,
    check_induced_isomorphism,
    check_order_preserving,
    check_suitable_matching,
    is_step_isometry,
)
from .engine import MatchTranscript, back_and_forth, certify_prefixes
from .icd import ICDTargetContext, build_icd_target
from .sd import SDTargetContext, build_sd_target
from .state import PartialMatch

__all__ = [
    "Check",
    "ICDTargetContext",
    "MatchTranscript",
    "MatchingReport",
    "PartialMatch",
    "SDTargetContext",
    "back_and_forth",
    "build_icd_target",
    "build_sd_target",
    "certify_prefixes",
    "check_induced_isomorphism",
    "check_order_preserving",
    "check_suitable_matching",
    "is_step_isometry",
]
