"""Latency-aware dynamic multi-connectivity for URLLC, by Monte Carlo."""

from .config import ScenarioConfig, parse_config
from .engine import run_policies, run_simulation
from .metrics import finalize, merge
from .policy import PolicyKind, PolicyName

__all__ = ["ScenarioConfig", "parse_config", "run_simulation", "run_policies",
           "finalize", "merge", "PolicyKind", "PolicyName"]
__version__ = "0.1.0"
