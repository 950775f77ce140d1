"""Exact per-packet statistics for a fixed position with fading switched off.

With unit fading gains every attempt's SNRs, blocklengths, connectivity
mode and error probability are deterministic, so the HARQ attempt tree
can be enumerated. This is written against the rules directly rather than
reusing the engine, and serves as its reference.
"""

import math
from dataclasses import dataclass

import numpy as np

from .fblmath import channel_usage, outage_probability
from .policy import PolicyName
from .radio import mean_snrs


@dataclass(frozen=True)
class AttemptTree:
    error_probs: tuple       # p_1 .. p_K
    modes: tuple             # "SC" / "MC" per attempt
    channel_uses: tuple      # resources consumed by attempt k
    latencies_ttis: tuple    # latency if attempt k is the first success

    def path_probabilities(self):
        """Probability that the packet stops after attempt k, plus the all-fail path."""
        reach, stop = 1.0, []
        for p in self.error_probs:
            stop.append(reach * (1.0 - p))
            reach *= p
        return stop, reach


@dataclass(frozen=True)
class PacketStats:
    outage_prob: float
    expected_transmissions: float
    var_transmissions: float
    expected_channel_uses: float
    var_channel_uses: float
    latency_distribution: dict   # latency in TTIs -> unconditional probability
    tree: AttemptTree


def build_tree(cfg, position, policy=None):
    policy = policy or cfg.policy
    kind = PolicyName(policy.kind)
    g_m, g_s = (float(v) for v in mean_snrs(cfg.layout, cfg.pathloss, np.asarray(position, float)))
    L, bler = cfg.payload_bits, cfg.initial_bler
    serv, other = (g_s, g_m) if g_s > g_m else (g_m, g_s)
    r_serv = channel_usage(L, serv, bler, quantize=cfg.quantize_blocklength)
    r_other = channel_usage(L, other, bler, quantize=cfg.quantize_blocklength)
    eligible = abs(10.0 * math.log10(g_m / g_s)) < policy.delta_mc_db

    probs, modes, uses, lats = [], [], [], []
    budget, k = cfg.initial_budget_ttis, 1
    while budget >= 1:
        if kind is PolicyName.SC:
            mc = False
        elif kind is PolicyName.LEGACY_MC:
            mc = eligible
        else:
            mc = eligible and budget < policy.tau_ttis
        if mc and cfg.mc_success == "independent":
            p = outage_probability(r_serv, k * serv, L) * outage_probability(r_other, k * other, L)
        elif mc:
            p = outage_probability(r_serv, k * max(g_m, g_s), L)
        elif k == 1:
            p = bler
        else:
            p = outage_probability(r_serv, k * serv, L)
        probs.append(p)
        modes.append("MC" if mc else "SC")
        uses.append(r_serv + (r_other if mc else 0.0))
        lats.append(cfg.initial_budget_ttis - budget + 1)
        budget -= cfg.harq_rtt_ttis
        k += 1
    return AttemptTree(tuple(probs), tuple(modes), tuple(uses), tuple(lats))


def analytic_packet_stats(cfg, position, policy=None):
    """Outage, transmission and resource moments by enumerating the attempt tree."""
    tree = build_tree(cfg, position, policy)
    stop, outage = tree.path_probabilities()
    K = len(tree.error_probs)
    # path j < K stops after attempt j+1 succeeds; path K is the all-fail branch
    weights = stop + [outage]
    n_tx = [j + 1 for j in range(K)] + [K]
    cum = list(np.cumsum(tree.channel_uses))
    uses = cum + [cum[-1]]
    e_tx = sum(w * t for w, t in zip(weights, n_tx))
    e_cu = sum(w * u for w, u in zip(weights, uses))
    return PacketStats(
        outage_prob=outage,
        expected_transmissions=e_tx,
        var_transmissions=sum(w * (t - e_tx) ** 2 for w, t in zip(weights, n_tx)),
        expected_channel_uses=e_cu,
        var_channel_uses=sum(w * (u - e_cu) ** 2 for w, u in zip(weights, uses)),
        latency_distribution={lat: w for lat, w in zip(tree.latencies_ttis, stop)},
        tree=tree,
    )


def eligibility_area_fraction(layout, model, delta_mc_db, n_radial=1000, n_angular=1000):
    """Share of the macro disc where the fading-free SNR gap is below ``delta_mc_db``.

    Midpoint rule on an ``n_radial`` x ``n_angular`` polar grid, each cell
    weighted by its area.
    """
    if math.isinf(delta_mc_db):
        return 1.0
    dr = layout.macro_radius / n_radial
    r = (np.arange(n_radial) + 0.5) * dr
    theta = (np.arange(n_angular) + 0.5) * (2.0 * np.pi / n_angular)
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    pos = np.stack([layout.macro_position[0] + rr * np.cos(tt),
                    layout.macro_position[1] + rr * np.sin(tt)], axis=-1)
    g_m, g_s = mean_snrs(layout, model, pos)
    inside = np.abs(10.0 * np.log10(g_m) - 10.0 * np.log10(g_s)) < delta_mc_db
    return float(np.sum(inside * rr) / np.sum(rr))
