"""
Verification suites: finite-difference gradient checks and seeded property checks.
"""

from .registry import PropertyCheck, PropertyResult, SuiteRegistry, registry, verification_property
from .gradcheck import (
    GradCheckResult, central_difference, check_adapter_gradients, check_loss_gradient,
    check_net_gradients, max_relative_error,
)
from .suites import SuiteReport, run_suite, small_srlora_config

__all__ = [
    "PropertyCheck", "PropertyResult", "SuiteRegistry", "registry", "verification_property",
    "GradCheckResult", "central_difference", "check_adapter_gradients", "check_loss_gradient",
    "check_net_gradients", "max_relative_error",
    "SuiteReport", "run_suite", "small_srlora_config",
]
