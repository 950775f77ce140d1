from dataclasses import replace

import numpy as np
import pytest

from urllc_mc import ScenarioConfig, finalize, run_policies, run_simulation
from urllc_mc.engine import (PacketBatch, execute_attempts, failure_path_probabilities, generate_traffic,
                             make_streams, new_report, run_slot)
from urllc_mc.fblmath import channel_usage
from urllc_mc.policy import Mode

SMALL = ScenarioConfig(n_slots=3000, seed=7)


def one_packet(cfg, uniforms, position=(240.0, 0.0)):
    cfg = replace(cfg, n_users=1, activation_prob=1.0, fixed_position=position)
    batch = generate_traffic(cfg, 0, make_streams(cfg.seed))
    batch.uniforms[0, :] = uniforms
    return cfg, batch


def drive(cfg, batch):
    """Run the slot loop on a prefilled buffer and return (report, trace)."""
    report, trace, buffers, slot = new_report(cfg), [], {0: batch}, 0
    streams = make_streams(cfg.seed)
    while buffers:
        run_slot(cfg, buffers, slot, streams, report, arrivals=False, trace=trace)
        slot += 1
    return report, trace


def test_immediate_success():
    # u = 1 is never below an error probability, so the attempt succeeds
    cfg, b = one_packet(ScenarioConfig(), [1.0, 1.0, 1.0])
    report, trace = drive(cfg, b)
    assert report.outages == 0 and dict(report.latency_histogram) == {1: 1}
    assert finalize(report).mean_latency_ms == 0.125


def test_always_failing_packet_gets_three_attempts():
    cfg, b = one_packet(ScenarioConfig(), [-1.0, -1.0, -1.0])
    report, trace = drive(cfg, b)
    assert [t["slot"] for t in trace] == [0, 2, 4]
    assert [t["budget"] for t in trace] == [6, 4, 2]
    assert report.outages == 1 and dict(report.transmissions_histogram) == {3: 1}


def test_success_on_second_attempt():
    cfg, b = one_packet(ScenarioConfig(), [-1.0, 1.0, 1.0])
    report, _ = drive(cfg, b)
    assert dict(report.latency_histogram) == {3: 1}
    assert finalize(report).mean_latency_ms == pytest.approx(0.375)


def test_mc_entry_counted_once_per_packet():
    cfg = ScenarioConfig().with_policy("legacy_mc")
    cfg, b = one_packet(cfg, [-1.0, -1.0, -1.0], position=(400.0, 0.0))
    report, trace = drive(cfg, b)
    assert [t["record"].mode for t in trace] == [Mode.MC] * 3
    assert report.users_entered_mc == 1


def test_traffic_generation():
    streams = make_streams(1)
    assert len(generate_traffic(replace(SMALL, activation_prob=0.0), 0, streams, n_slots=100)) == 0
    assert len(generate_traffic(replace(SMALL, activation_prob=1.0), 0, streams)) == 10
    b = generate_traffic(ScenarioConfig(), 0, make_streams(2), n_slots=100_000)
    assert len(b) / 100_000 == pytest.approx(3.0, abs=0.05)
    assert np.all(b.budget == 6) and np.all(np.diff(b.born) >= 0)


def test_traffic_independent_of_block_size():
    cfg = ScenarioConfig()
    whole = generate_traffic(cfg, 0, make_streams(3), n_slots=500)
    streams = make_streams(3)
    parts, nid = [], 0
    for s in range(500):
        p = generate_traffic(cfg, s, streams, first_id=nid)
        nid += len(p)
        parts.append(p)
    joined = PacketBatch.concat(parts)
    for col in ("pid", "born", "pos", "fading", "uniforms", "eligible"):
        np.testing.assert_array_equal(getattr(whole, col), getattr(joined, col))


@pytest.mark.parametrize("policy", ["sc", "legacy_mc", "latency_aware_mc"])
def test_slot_loop_equals_block_loop(policy):
    cfg = SMALL.with_policy(policy)
    a = run_simulation(cfg, block_slots=1)
    b = run_simulation(cfg, block_slots=257)
    for f in ("packets_total", "outages", "users_entered_mc", "latency_histogram",
              "transmissions_histogram", "eligible_packets"):
        assert getattr(a, f) == getattr(b, f)
    assert a.total_channel_uses == pytest.approx(b.total_channel_uses, rel=1e-12)


def test_determinism():
    assert run_simulation(SMALL) == run_simulation(SMALL)
    assert run_simulation(SMALL) != run_simulation(replace(SMALL, seed=8))


def test_zero_slots():
    r = run_simulation(replace(SMALL, n_slots=0))
    assert r.packets_total == 0
    with pytest.raises(ValueError):
        finalize(r)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        replace(SMALL, activation_prob=1.5)
    with pytest.raises(TypeError):
        run_simulation({"n_slots": 3})


@pytest.fixture(scope="module")
def traced():
    out = {}
    for p in ("sc", "legacy_mc", "latency_aware_mc"):
        trace = []
        rep = run_simulation(SMALL.with_policy(p), trace=trace)
        out[p] = (rep, trace)
    return out


def test_conservation_and_latency_support(traced):
    for rep, _ in traced.values():
        assert rep.packets_total == rep.successes + rep.outages
        assert sum(rep.transmissions_histogram.values()) == rep.packets_total
        assert set(rep.latency_histogram) <= {1, 3, 5}


def test_trace_invariants(traced):
    for policy, (_, trace) in traced.items():
        by_pid = {}
        for t in trace:
            by_pid.setdefault(t["pid"], []).append(t)
            rec = t["record"]
            # every attempt fits the remaining budget
            assert t["budget"] >= 1
            R = channel_usage(256, t["serving_snr"], 0.1)
            if rec.mode is Mode.SC:
                assert rec.channel_uses == pytest.approx(R, rel=1e-12)
                assert min(rec.channel_uses_macro, rec.channel_uses_small) == 0.0
            else:
                R_other = channel_usage(256, t["other_snr"], 0.1)
                assert rec.channel_uses == pytest.approx(R + R_other, rel=1e-12)
        for attempts in by_pid.values():
            eff = [a["effective_snr"] for a in attempts]
            assert all(b >= a for a, b in zip(eff, eff[1:]))
            slots = [a["slot"] for a in attempts]
            assert slots == [slots[0] + 2 * i for i in range(len(slots))]
            assert [a["record"].attempt_index for a in attempts] == list(range(1, len(attempts) + 1))
            assert all(not a["record"].success for a in attempts[:-1])


def test_latency_aware_first_attempt_is_sc(traced):
    _, trace = traced["latency_aware_mc"]
    assert all(t["record"].mode is Mode.SC for t in trace if t["record"].attempt_index == 1)
    assert all(t["record"].error_probability == 0.1 for t in trace if t["record"].attempt_index == 1)


def test_common_random_numbers_across_policies(traced):
    sc, legacy = traced["sc"][1], traced["legacy_mc"][1]
    first_sc = {t["pid"]: t["serving_snr"] for t in sc if t["record"].attempt_index == 1}
    first_mc = {t["pid"]: t["serving_snr"] for t in legacy if t["record"].attempt_index == 1}
    assert first_sc == first_mc


def test_independent_success_model_runs():
    rep = run_simulation(replace(SMALL, mc_success="independent").with_policy("legacy_mc"))
    assert rep.packets_total > 0


def test_failure_path_probabilities():
    cfg = replace(SMALL, n_slots=2000)
    p = failure_path_probabilities(cfg)
    assert p.size == run_simulation(cfg).packets_total
    assert np.all((p >= 0) & (p <= 0.1))
    legacy = failure_path_probabilities(cfg.with_policy("legacy_mc"))
    assert p.size == legacy.size
    assert legacy.mean() < p.mean()


def test_run_policies_share_traffic():
    res = run_policies(replace(SMALL, n_slots=500))
    assert len({r.packets_total for r in res.values()}) == 1
