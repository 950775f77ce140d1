"""Slotted-time Monte Carlo of downlink URLLC packets with HARQ and MC.

Each packet draws its position, the fading of every possible attempt and
the uniforms of every success draw when it is generated. Those draws come
from named substreams of one master seed, so two policies run with the
same seed see the same traffic and the same channels (common random
numbers), and the result does not depend on how slots are batched.

Packets never contend for resources, so a block of slots can be processed
in a few vectorised passes with results identical to the literal
slot-by-slot loop in :func:`run_slot`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fblmath, metrics
from .config import ScenarioConfig
from .link import AttemptRecord, HarqState
from .policy import Cell, Mode, ModeDecision, Reason, activate_mc
from .radio import draw_fading, mean_snrs, place_user

STREAMS = ("traffic", "placement", "fading", "outcome")


def make_streams(seed):
    """Independent named generators derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(s)) for name, s in zip(STREAMS, children)}


@dataclass
class UserState:
    """One packet, for inspection. The engine itself works on :class:`PacketBatch`."""

    id: int
    position: tuple
    budget_ttis: int
    harq: HarqState
    born_slot: int
    mode_history: list = field(default_factory=list)


_COLUMNS = ("pid", "born", "due", "pos", "mean_m", "mean_s", "serving", "eligible", "budget",
            "acc_m", "acc_s", "attempts", "entered_mc", "fading", "uniforms", "path_pe")


@dataclass
class PacketBatch:
    """Struct-of-arrays for packets in flight; rows are kept in (born, pid) order."""

    pid: np.ndarray
    born: np.ndarray
    due: np.ndarray
    pos: np.ndarray
    mean_m: np.ndarray
    mean_s: np.ndarray
    serving: np.ndarray
    eligible: np.ndarray
    budget: np.ndarray
    acc_m: np.ndarray
    acc_s: np.ndarray
    attempts: np.ndarray
    entered_mc: np.ndarray
    fading: np.ndarray
    uniforms: np.ndarray
    path_pe: np.ndarray

    def __len__(self):
        return self.pid.size

    def take(self, idx):
        return PacketBatch(*(getattr(self, c)[idx] for c in _COLUMNS))

    @staticmethod
    def concat(batches):
        batches = [b for b in batches if b is not None and len(b)]
        if not batches:
            return None
        if len(batches) == 1:
            return batches[0]
        return PacketBatch(*(np.concatenate([getattr(b, c) for b in batches]) for c in _COLUMNS))

    def user(self, i):
        return UserState(
            id=int(self.pid[i]),
            position=tuple(self.pos[i]),
            budget_ttis=int(self.budget[i]),
            harq=HarqState(float(self.acc_m[i]), float(self.acc_s[i]), int(self.attempts[i])),
            born_slot=int(self.born[i]),
        )


def generate_traffic(cfg, slot, streams, n_slots=1, first_id=0):
    """Activate each of the ``n_users`` independently in slots ``slot .. slot+n_slots-1``."""
    active = streams["traffic"].random(n_slots * cfg.n_users) < cfg.activation_prob
    idx = np.flatnonzero(active)
    n = idx.size
    born = slot + idx // max(cfg.n_users, 1)
    if cfg.fixed_position is not None:
        pos = np.tile(np.asarray(cfg.fixed_position, dtype=float), (n, 1))
    else:
        pos = place_user(cfg.layout, streams["placement"], size=n)
    k = cfg.max_attempts
    if cfg.fading:
        fading = draw_fading(streams["fading"], n * k * 2).reshape(n, k, 2)
    else:
        fading = np.ones((n, k, 2))
    uniforms = streams["outcome"].random(n * k).reshape(n, k)
    mean_m, mean_s = mean_snrs(cfg.layout, cfg.pathloss, pos)
    gap = np.abs(10.0 * np.log10(mean_m) - 10.0 * np.log10(mean_s))
    return PacketBatch(
        pid=first_id + np.arange(n, dtype=np.int64),
        born=born.astype(np.int64),
        due=born.astype(np.int64),
        pos=pos,
        mean_m=mean_m,
        mean_s=mean_s,
        serving=(mean_s > mean_m).astype(np.int8),
        eligible=gap < cfg.policy.delta_mc_db,
        budget=np.full(n, cfg.initial_budget_ttis, dtype=np.int64),
        acc_m=np.zeros(n),
        acc_s=np.zeros(n),
        attempts=np.zeros(n, dtype=np.int64),
        entered_mc=np.zeros(n, dtype=bool),
        fading=fading,
        uniforms=uniforms,
        path_pe=np.ones(n),
    )


def execute_attempts(cfg, batch, report, trace=None, finished=None):
    """Run one transmission attempt for every packet in ``batch``.

    Returns the packets to retry (already rescheduled and charged one RTT
    of budget). Delivered packets and final outages are closed in
    ``report`` and, if ``finished`` is a list, appended to it as a batch.
    """
    n = len(batch)
    rows = np.arange(n)
    k = batch.attempts
    inst_m = batch.mean_m * batch.fading[rows, k, Cell.MACRO]
    inst_s = batch.mean_s * batch.fading[rows, k, Cell.SMALL]
    batch.acc_m = batch.acc_m + inst_m
    batch.acc_s = batch.acc_s + inst_s
    batch.attempts = k + 1

    small = batch.serving == Cell.SMALL
    inst_serv = np.where(small, inst_s, inst_m)
    inst_other = np.where(small, inst_m, inst_s)
    acc_serv = np.where(small, batch.acc_s, batch.acc_m)
    L, bler = cfg.payload_bits, cfg.initial_bler
    R_serv = fblmath.channel_usage(L, inst_serv, bler, quantize=cfg.quantize_blocklength)

    mc = activate_mc(cfg.policy, batch.eligible, batch.budget)
    R_other = np.zeros(n)
    if mc.any():
        R_other[mc] = fblmath.channel_usage(L, inst_other[mc], bler, quantize=cfg.quantize_blocklength)

    first = k == 0
    gamma = np.where(mc, np.maximum(batch.acc_m, batch.acc_s), acc_serv)
    pe = np.where(first & ~mc, bler, 0.0)
    calc = ~(first & ~mc)
    if calc.any():
        pe[calc] = fblmath.outage_probability(R_serv[calc], gamma[calc], L)
    if cfg.mc_success == "independent" and mc.any():
        # both nodes must fail; each decodes its own Chase-combined copy
        acc_other = np.where(small, batch.acc_m, batch.acc_s)
        pe[mc] = (fblmath.outage_probability(R_serv[mc], acc_serv[mc], L)
                  * fblmath.outage_probability(R_other[mc], acc_other[mc], L))
    ok = batch.uniforms[rows, k] >= pe
    batch.path_pe = batch.path_pe * pe

    new_mc = mc & ~batch.entered_mc
    batch.entered_mc = batch.entered_mc | mc
    metrics.record_attempt_batch(report, mc.astype(np.int8), R_serv + R_other, new_mc)

    if trace is not None:
        for i in range(n):
            R_m, R_s = (R_other[i], R_serv[i]) if small[i] else (R_serv[i], R_other[i])
            trace.append({
                "pid": int(batch.pid[i]),
                "slot": int(batch.due[i]),
                "budget": int(batch.budget[i]),
                "serving_snr": float(inst_serv[i]),
                "other_snr": float(inst_other[i]),
                "effective_snr": float(gamma[i]),
                "decision": ModeDecision(
                    Mode.MC if mc[i] else Mode.SC,
                    _reason(cfg, batch.eligible[i], mc[i])),
                "record": AttemptRecord(
                    mode=Mode.MC if mc[i] else Mode.SC,
                    channel_uses_macro=float(R_m),
                    channel_uses_small=float(R_s),
                    error_probability=float(pe[i]),
                    success=bool(ok[i]),
                    attempt_index=int(k[i]) + 1,
                ),
            })

    batch.budget = np.where(ok, batch.budget, batch.budget - cfg.harq_rtt_ttis)
    # one more attempt needs one slot of remaining budget
    retry = ~ok & (batch.budget >= 1)
    done = ~retry
    if done.any():
        fin = batch.take(done)
        latency = cfg.initial_budget_ttis - fin.budget + 1
        metrics.record_packets_done(report, ok[done], fin.attempts, latency, fin.entered_mc, fin.eligible)
        if finished is not None:
            finished.append(fin)
    again = batch.take(retry)
    again.due = again.due + cfg.harq_rtt_ttis
    return again


def _reason(cfg, eligible, mc):
    if mc:
        return Reason.ACTIVATED
    if cfg.policy.kind.value == "sc":
        return Reason.POLICY_SC
    return Reason.LATENCY_NOT_CRITICAL if eligible else Reason.SNR_INELIGIBLE


def new_report(cfg):
    return metrics.MetricsReport(policy=cfg.policy.tag, seeds=(cfg.seed,), n_slots=cfg.n_slots,
                                 tti_ms=cfg.tti_ms)


def run_slot(cfg, buffers, slot, streams, report, next_id=0, arrivals=True, trace=None):
    """One iteration of the slot loop.

    New arrivals join the buffer of ``slot`` behind pending retransmissions,
    every buffered packet makes one attempt, and failures that still have
    budget move to the buffer ``harq_rtt_ttis`` slots ahead. Returns the next
    free packet id.
    """
    if arrivals:
        new = generate_traffic(cfg, slot, streams, first_id=next_id)
        next_id += len(new)
        buffers[slot] = PacketBatch.concat([buffers.get(slot), new])
    batch = buffers.pop(slot, None)
    if batch is not None and len(batch):
        again = execute_attempts(cfg, batch, report, trace)
        if len(again):
            target = slot + cfg.harq_rtt_ttis
            buffers[target] = PacketBatch.concat([buffers.get(target), again])
    return next_id


def run_simulation(cfg, block_slots=4096, trace=None):
    """Simulate ``cfg.n_slots`` slots of arrivals, then drain in-flight packets.

    ``block_slots=1`` runs the literal slot loop; larger blocks give the same
    report much faster.
    """
    if not isinstance(cfg, ScenarioConfig):
        raise TypeError("cfg must be a ScenarioConfig")
    streams = make_streams(cfg.seed)
    report = new_report(cfg)
    if block_slots <= 1:
        buffers, next_id, slot = {}, 0, 0
        while slot < cfg.n_slots or buffers:
            next_id = run_slot(cfg, buffers, slot, streams, report, next_id,
                               arrivals=slot < cfg.n_slots, trace=trace)
            slot += 1
        return report

    pending, next_id = None, 0
    for start in range(0, cfg.n_slots, block_slots):
        stop = min(start + block_slots, cfg.n_slots)
        new = generate_traffic(cfg, start, streams, n_slots=stop - start, first_id=next_id)
        next_id += len(new)
        pending = PacketBatch.concat([pending, new])
        while pending is not None:
            due = pending.due < stop
            if not due.any():
                break
            again = execute_attempts(cfg, pending.take(due), report, trace)
            pending = PacketBatch.concat([pending.take(~due), again])
    while pending is not None:
        pending = PacketBatch.concat([execute_attempts(cfg, pending, report, trace)])
    return report


def failure_path_probabilities(cfg, block_slots=4096):
    """Probability, per generated packet, that every attempt the budget allows fails.

    Each packet is pushed down its all-failure branch and the per-attempt
    error probabilities along it are multiplied. The mean over packets is an
    unbiased, much lower-variance estimate of the outage probability than
    counting outages. Rows are in packet-id order, so arrays from different
    policies with the same seed pair up packet by packet.
    """
    streams = make_streams(cfg.seed)
    report = new_report(cfg)
    out, next_id = [], 0
    for start in range(0, cfg.n_slots, block_slots):
        stop = min(start + block_slots, cfg.n_slots)
        batch = generate_traffic(cfg, start, streams, n_slots=stop - start, first_id=next_id)
        next_id += len(batch)
        # no uniform is below -1, so every attempt fails
        batch.uniforms[:] = -1.0
        finished = []
        while batch is not None and len(batch):
            batch = execute_attempts(cfg, batch, report, finished=finished)
        for fin in finished:
            out.append((fin.pid, fin.path_pe))
    if not out:
        return np.zeros(0)
    pid = np.concatenate([o[0] for o in out])
    pe = np.concatenate([o[1] for o in out])
    return pe[np.argsort(pid, kind="stable")]


def run_policies(cfg, policies=("sc", "legacy_mc", "latency_aware_mc"), **kw):
    """Same seed for every policy, so they share traffic and channels."""
    return {p: run_simulation(cfg.with_policy(p), **kw) for p in policies}
