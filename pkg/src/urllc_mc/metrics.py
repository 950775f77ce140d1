"""KPI aggregation: outage, channel uses, latency and MC-user statistics."""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .policy import Mode


@dataclass
class MetricsReport:
    """Raw counters of one or more replications of a single policy.

    Reports merge by fieldwise addition (``a + b``). Channel-use sums are kept
    as lists of partial sums and totalled with :func:`math.fsum`, so the
    merged totals do not depend on merge order.
    """

    policy: str = ""
    seeds: tuple = ()
    n_slots: int = 0
    tti_ms: float = 0.125
    packets_total: int = 0
    outages: int = 0
    users_entered_mc: int = 0
    mc_user_outages: int = 0
    mc_user_transmissions: int = 0
    eligible_packets: int = 0
    eligible_outages: int = 0
    eligible_transmissions: int = 0
    latency_histogram: Counter = field(default_factory=Counter)
    transmissions_histogram: Counter = field(default_factory=Counter)
    channel_use_parts: dict = field(default_factory=lambda: {"sc": [], "mc": []})
    _mc_packet_ids: set = field(default_factory=set, repr=False, compare=False)

    @property
    def total_channel_uses_by_mode(self):
        return {m: math.fsum(v) for m, v in self.channel_use_parts.items()}

    @property
    def total_channel_uses(self):
        return math.fsum(self.channel_use_parts["sc"] + self.channel_use_parts["mc"])

    @property
    def successes(self):
        return self.packets_total - self.outages

    def __add__(self, other):
        if self.policy and other.policy and self.policy != other.policy:
            raise ValueError("cannot merge reports of different policies")
        if self.tti_ms != other.tti_ms:
            raise ValueError("cannot merge reports with different TTI sizes")
        out = MetricsReport(
            policy=self.policy or other.policy,
            seeds=tuple(sorted(self.seeds + other.seeds)),
            tti_ms=self.tti_ms,
            latency_histogram=self.latency_histogram + other.latency_histogram,
            transmissions_histogram=self.transmissions_histogram + other.transmissions_histogram,
            channel_use_parts={m: sorted(self.channel_use_parts[m] + other.channel_use_parts[m])
                               for m in ("sc", "mc")},
        )
        for name in ("n_slots", "packets_total", "outages", "users_entered_mc", "mc_user_outages",
                     "mc_user_transmissions", "eligible_packets", "eligible_outages",
                     "eligible_transmissions"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        return out

    def add_channel_uses(self, mode, amount):
        self.channel_use_parts["mc" if mode == Mode.MC else "sc"].append(float(amount))


def merge(reports):
    reports = list(reports)
    out = reports[0]
    for r in reports[1:]:
        out = out + r
    return out


def record_attempt(report, record, packet_id=None):
    """Account one attempt's channel uses and count first MC entry per packet."""
    report.add_channel_uses(record.mode, record.channel_uses)
    if record.mode == Mode.MC:
        key = packet_id if packet_id is not None else id(record)
        if key not in report._mc_packet_ids:
            report._mc_packet_ids.add(key)
            report.users_entered_mc += 1
    return report


def record_attempt_batch(report, mode, channel_uses, new_mc_entries):
    """Vectorised :func:`record_attempt` used by the engine."""
    mc = np.asarray(mode) == Mode.MC
    cu = np.asarray(channel_uses, dtype=float)
    if np.any(~mc):
        report.add_channel_uses(Mode.SC, cu[~mc].sum())
    if np.any(mc):
        report.add_channel_uses(Mode.MC, cu[mc].sum())
    report.users_entered_mc += int(np.count_nonzero(new_mc_entries))


def record_packets_done(report, success, transmissions, latency_ttis, entered_mc, eligible):
    """Close out finished packets (delivered or in final outage)."""
    success = np.asarray(success, dtype=bool)
    tx = np.asarray(transmissions, dtype=np.int64)
    entered_mc = np.asarray(entered_mc, dtype=bool)
    eligible = np.asarray(eligible, dtype=bool)
    fail = ~success
    report.packets_total += success.size
    report.outages += int(fail.sum())
    report.latency_histogram.update(np.asarray(latency_ttis)[success].tolist())
    report.transmissions_histogram.update(tx.tolist())
    report.mc_user_outages += int((fail & entered_mc).sum())
    report.mc_user_transmissions += int(tx[entered_mc].sum())
    report.eligible_packets += int(eligible.sum())
    report.eligible_outages += int((fail & eligible).sum())
    report.eligible_transmissions += int(tx[eligible].sum())


@dataclass(frozen=True)
class Kpis:
    policy: str
    packets: int
    outages: int
    outage_probability: float
    total_channel_uses: float
    resource_per_packet: float
    mean_latency_ms: float
    mean_transmissions: float
    users_entered_mc: int
    mc_fraction: float
    ccdf_points: tuple


def latency_ccdf(report):
    """(latency_ms, P(latency > latency_ms)) over delivered packets at each support point."""
    n = sum(report.latency_histogram.values())
    if n == 0:
        return ()
    pts, above = [], n
    for ttis in sorted(report.latency_histogram):
        above -= report.latency_histogram[ttis]
        pts.append((ttis * report.tti_ms, above / n))
    return tuple(pts)


def finalize(report):
    if report.packets_total == 0:
        raise ValueError("empty report: no packets were generated")
    n = report.packets_total
    delivered = sum(report.latency_histogram.values())
    lat_sum = sum(k * v for k, v in report.latency_histogram.items())
    tx_sum = sum(k * v for k, v in report.transmissions_histogram.items())
    total = report.total_channel_uses
    return Kpis(
        policy=report.policy,
        packets=n,
        outages=report.outages,
        outage_probability=report.outages / n,
        total_channel_uses=total,
        resource_per_packet=total / n,
        mean_latency_ms=lat_sum / delivered * report.tti_ms if delivered else math.nan,
        mean_transmissions=tx_sum / n,
        users_entered_mc=report.users_entered_mc,
        mc_fraction=report.users_entered_mc / n,
        ccdf_points=latency_ccdf(report),
    )


def table2_row(report):
    """Users in MC, their outages and mean transmissions.

    For policies that never enter MC the SNR-eligible users stand in, which
    is the population the MC policies would have switched.
    """
    if report.users_entered_mc:
        users, outages, tx = report.users_entered_mc, report.mc_user_outages, report.mc_user_transmissions
    else:
        users, outages, tx = report.eligible_packets, report.eligible_outages, report.eligible_transmissions
    return {
        "users_in_mc": report.users_entered_mc,
        "mc_share": report.users_entered_mc / report.packets_total if report.packets_total else 0.0,
        "outages": outages,
        "avg_transmissions": tx / users if users else math.nan,
    }
