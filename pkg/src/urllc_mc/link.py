"""HARQ with Chase combining for one in-flight packet."""

from dataclasses import dataclass, replace

import numpy as np

from .fblmath import outage_probability
from .policy import Cell, Mode, effective_snr


@dataclass(frozen=True)
class HarqState:
    accumulated_snr_macro: float = 0.0
    accumulated_snr_small: float = 0.0
    attempts: int = 0
    first_attempt_blocklength_macro: float = None
    first_attempt_blocklength_small: float = None


@dataclass(frozen=True)
class AttemptRecord:
    mode: Mode
    channel_uses_macro: float
    channel_uses_small: float
    error_probability: float
    success: bool
    attempt_index: int

    def __post_init__(self):
        if not 0.0 <= self.error_probability <= 1.0:
            raise ValueError("error_probability outside [0, 1]")

    @property
    def channel_uses(self):
        return self.channel_uses_macro + self.channel_uses_small


def combine(state, new_snr_macro, new_snr_small):
    """Add one attempt's SNRs to the per-link Chase accumulators."""
    if new_snr_macro < 0 or new_snr_small < 0:
        raise ValueError("SNR must be >= 0")
    return replace(
        state,
        accumulated_snr_macro=state.accumulated_snr_macro + new_snr_macro,
        accumulated_snr_small=state.accumulated_snr_small + new_snr_small,
        attempts=state.attempts + 1,
    )


def attempt_error_probability(state, mode, R, L, is_first_attempt, target_bler,
                              serving=Cell.MACRO):
    """Per-attempt decoding failure probability.

    A first SC attempt fails with exactly ``target_bler`` because ``R`` was
    sized for it. Every other case evaluates the finite-blocklength error at
    the Chase-combined effective SNR. Works elementwise on batches.
    """
    gamma = effective_snr(mode, state, serving)
    pe = outage_probability(R, gamma, L)
    sc_first = (np.asarray(mode) == Mode.SC) & np.asarray(is_first_attempt, dtype=bool)
    out = np.where(sc_first, target_bler, pe)
    return float(out) if out.ndim == 0 else out


def draw_outcome(pe, rng=None, u=None):
    """Bernoulli success with probability ``1 - pe``.

    Pass a pre-drawn uniform ``u`` in [0, 1) to keep draws aligned across
    policies; otherwise one is taken from ``rng``.
    """
    if u is None:
        u = rng.random(np.shape(pe))
    out = np.asarray(u) >= np.asarray(pe)
    return bool(out) if out.ndim == 0 else out
