from collections import Counter

import pytest

from urllc_mc import ScenarioConfig, finalize, merge, run_simulation
from urllc_mc.link import AttemptRecord
from urllc_mc.metrics import MetricsReport, latency_ccdf, record_attempt, table2_row
from urllc_mc.policy import Mode


def rec(mode, m, s=0.0):
    return AttemptRecord(mode, m, s, 0.1, False, 1)


def test_record_attempt_examples():
    r = record_attempt(MetricsReport(), rec(Mode.SC, 160.0), packet_id=1)
    assert r.total_channel_uses == 160.0
    record_attempt(r, rec(Mode.MC, 160.0, 150.0), packet_id=2)
    assert r.total_channel_uses == 470.0
    assert r.total_channel_uses_by_mode == {"sc": 160.0, "mc": 310.0}
    record_attempt(r, rec(Mode.MC, 100.0, 100.0), packet_id=2)
    assert r.users_entered_mc == 1


def test_finalize_all_first_attempt():
    r = MetricsReport(packets_total=4, latency_histogram=Counter({1: 4}),
                      transmissions_histogram=Counter({1: 4}))
    k = finalize(r)
    assert k.mean_latency_ms == 0.125 and k.mean_transmissions == 1.0
    assert k.ccdf_points == ((0.125, 0.0),)


def test_finalize_counts():
    r = MetricsReport(packets_total=10, outages=1, latency_histogram=Counter({1: 6, 3: 2, 5: 1}),
                      transmissions_histogram=Counter({1: 6, 2: 2, 3: 2}), users_entered_mc=4)
    r.channel_use_parts["sc"] += [100.0, 50.0]
    k = finalize(r)
    assert k.outage_probability == 0.1
    assert k.resource_per_packet == 15.0
    assert k.mean_transmissions == pytest.approx(1.6)
    assert k.mean_latency_ms == pytest.approx((6 + 6 + 5) / 9 * 0.125)
    assert k.ccdf_points == ((0.125, 3 / 9), (0.375, 1 / 9), (0.625, 0.0))
    assert k.mc_fraction == 0.4


def test_empty_report_raises():
    with pytest.raises(ValueError):
        finalize(MetricsReport())


def test_ccdf_monotone():
    r = run_simulation(ScenarioConfig(n_slots=5000))
    c = [p for _, p in latency_ccdf(r)]
    assert all(b <= a for a, b in zip(c, c[1:]))
    assert c[-1] == 0.0


def test_merge_order_insensitive():
    reps = [run_simulation(ScenarioConfig(n_slots=2000, seed=s)) for s in range(3)]
    a, b, c = reps
    ab_c = finalize((a + b) + c)
    a_bc = finalize(a + (b + c))
    cba = finalize(merge([c, b, a]))
    assert ab_c == a_bc == cba
    assert (a + b).packets_total == a.packets_total + b.packets_total
    assert (a + b).seeds == (0, 1)


def test_merge_rejects_mixed_policies():
    a = MetricsReport(policy="sc")
    with pytest.raises(ValueError):
        a + MetricsReport(policy="legacy_mc")


def test_table2_row_falls_back_to_eligible_users():
    r = MetricsReport(packets_total=10, eligible_packets=4, eligible_outages=1, eligible_transmissions=5)
    row = table2_row(r)
    assert row["users_in_mc"] == 0 and row["outages"] == 1 and row["avg_transmissions"] == 1.25
