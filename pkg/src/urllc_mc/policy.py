"""Connectivity-mode decisions: single connectivity, legacy MC and latency-aware MC."""

import enum
import math
from dataclasses import dataclass

import numpy as np


class Mode(enum.IntEnum):
    SC = 0
    MC = 1


class Cell(enum.IntEnum):
    MACRO = 0
    SMALL = 1


class PolicyName(str, enum.Enum):
    SC = "sc"
    LEGACY_MC = "legacy_mc"
    LATENCY_AWARE_MC = "latency_aware_mc"


class Reason(str, enum.Enum):
    POLICY_SC = "policy-sc"
    SNR_INELIGIBLE = "snr-ineligible"
    LATENCY_NOT_CRITICAL = "latency-not-critical"
    ACTIVATED = "activated"


# remaining-budget threshold that never blocks MC
TAU_INFINITE = math.inf


@dataclass(frozen=True)
class PolicyKind:
    kind: PolicyName = PolicyName.LATENCY_AWARE_MC
    delta_mc_db: float = 20.0
    tau_ttis: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyName(self.kind))
        if self.delta_mc_db < 0:
            raise ValueError("delta_mc_db must be >= 0")
        if self.tau_ttis < 0:
            raise ValueError("tau_ttis must be >= 0")

    @property
    def tag(self):
        return self.kind.value


@dataclass(frozen=True)
class ModeDecision:
    mode: Mode
    reason: Reason


def snr_eligible(snapshot, delta_mc_db):
    """True where the fading-free SNR gap between the cells is strictly below ``delta_mc_db``."""
    gap = np.abs(10.0 * np.log10(snapshot.mean_snr_macro) - 10.0 * np.log10(snapshot.mean_snr_small))
    out = gap < delta_mc_db
    return bool(out) if np.ndim(out) == 0 else out


def serving_cell(mean_snr_macro, mean_snr_small):
    """Best-server association on fading-free SNR; ties go to the macro cell."""
    small = np.asarray(mean_snr_small) > np.asarray(mean_snr_macro)
    if small.ndim == 0:
        return Cell.SMALL if small else Cell.MACRO
    return small.astype(np.int8)


def activate_mc(policy, eligible, remaining_budget_ttis):
    """Vectorised MC activation mask for a batch of users."""
    eligible = np.asarray(eligible, dtype=bool)
    if policy.kind is PolicyName.SC:
        return np.zeros_like(eligible)
    if policy.kind is PolicyName.LEGACY_MC:
        return eligible
    return eligible & (np.asarray(remaining_budget_ttis) < policy.tau_ttis)


def decide_mode(policy, snapshot, remaining_budget_ttis):
    if remaining_budget_ttis < 0:
        raise ValueError("remaining budget must be >= 0")
    if policy.kind is PolicyName.SC:
        return ModeDecision(Mode.SC, Reason.POLICY_SC)
    if not snr_eligible(snapshot, policy.delta_mc_db):
        return ModeDecision(Mode.SC, Reason.SNR_INELIGIBLE)
    if policy.kind is PolicyName.LATENCY_AWARE_MC and not remaining_budget_ttis < policy.tau_ttis:
        return ModeDecision(Mode.SC, Reason.LATENCY_NOT_CRITICAL)
    return ModeDecision(Mode.MC, Reason.ACTIVATED)


def effective_snr(mode, state, serving=Cell.MACRO):
    """Chase-combined SNR seen by the decoder.

    MC selects the better of the two per-link accumulations; SC uses the
    serving link only. ``mode`` and ``serving`` may be arrays.
    """
    acc_m = np.asarray(state.accumulated_snr_macro, dtype=float)
    acc_s = np.asarray(state.accumulated_snr_small, dtype=float)
    sc = np.where(np.asarray(serving) == Cell.SMALL, acc_s, acc_m)
    out = np.where(np.asarray(mode) == Mode.MC, np.maximum(acc_m, acc_s), sc)
    return float(out) if out.ndim == 0 else out
