"""Command-line runner: policy sweeps, replications and CSV output.

Replication ``i`` uses seed ``base_seed + i``; every policy of the same
replication shares that seed and therefore the same traffic and channels.
"""

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .config import ConfigError, ScenarioConfig, parse_config
from .engine import run_simulation
from .metrics import finalize, merge, table2_row
from .oracle import analytic_packet_stats, eligibility_area_fraction
from .policy import PolicyName

ALL_POLICIES = tuple(p.value for p in PolicyName)

KPI_COLUMNS = ("policy", "seed", "n_slots", "packets", "outages", "outage_prob",
               "total_channel_uses", "resource_per_packet", "mean_latency_ms",
               "mean_transmissions", "users_entered_mc", "mc_fraction")
CCDF_COLUMNS = ("latency_ms", "ccdf")
ORACLE_COLUMNS = ("policy", "x", "y", "outage_prob", "expected_transmissions",
                  "expected_channel_uses", "eligible_area_fraction")


@dataclass(frozen=True)
class RunManifest:
    config: ScenarioConfig
    policies: tuple = ALL_POLICIES
    replications: int = 1
    base_seed: int = 0
    out_dir: Path = Path("results")
    jobs: int = 1

    def replication_seeds(self):
        return [self.base_seed + i for i in range(self.replications)]


def fmt(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.12g}"
    return str(x)


def _one(args):
    cfg, policy, seed = args
    return run_simulation(replace(cfg.with_policy(policy), seed=seed))


def _jobs(manifest):
    return [(manifest.config, p, s) for p in manifest.policies for s in manifest.replication_seeds()]


def run(manifest, stdout=sys.stdout):
    """Simulate every policy x replication and write kpi.csv plus one CCDF file per policy."""
    jobs = _jobs(manifest)
    if manifest.jobs > 1:
        with ProcessPoolExecutor(manifest.jobs) as pool:
            reports = list(pool.map(_one, jobs))
    else:
        reports = [_one(j) for j in jobs]

    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_policy = {}
    with open(out / "kpi.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(KPI_COLUMNS)
        for (_, policy, seed), rep in zip(jobs, reports):
            by_policy.setdefault(policy, []).append(rep)
            k = finalize(rep) if rep.packets_total else None
            w.writerow([fmt(v) for v in _kpi_row(policy, seed, rep, k)])

    print(f"{'policy':<18}{'users in MC':>14}{'MC share':>10}{'outages':>9}{'avg tx':>9}"
          f"{'outage':>12}{'res/pkt':>12}", file=stdout)
    for policy, reps in by_policy.items():
        merged = merge(reps)
        k = finalize(merged) if merged.packets_total else None
        with open(out / f"ccdf_{policy}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CCDF_COLUMNS)
            for lat, c in (k.ccdf_points if k else ()):
                w.writerow([fmt(float(lat)), fmt(float(c))])
        if k is None:
            print(f"{policy:<18}(no packets)", file=stdout)
            continue
        t2 = table2_row(merged)
        print(f"{policy:<18}{t2['users_in_mc']:>14}{t2['mc_share']:>10.2%}{t2['outages']:>9}"
              f"{t2['avg_transmissions']:>9.3f}{k.outage_probability:>12.3g}"
              f"{k.resource_per_packet:>12.1f}", file=stdout)
    return 0


def _kpi_row(policy, seed, rep, k):
    if k is None:
        return (policy, seed, rep.n_slots, 0, 0, math.nan, 0.0, math.nan, math.nan, math.nan, 0, math.nan)
    return (policy, seed, rep.n_slots, k.packets, k.outages, k.outage_probability,
            k.total_channel_uses, k.resource_per_packet, k.mean_latency_ms,
            k.mean_transmissions, k.users_entered_mc, k.mc_fraction)


def run_oracle(manifest, position, stdout=sys.stdout):
    """Fading-free analytic statistics at one position, written to oracle.csv."""
    cfg = replace(manifest.config, fading=False)
    frac = eligibility_area_fraction(cfg.layout, cfg.pathloss, cfg.policy.delta_mc_db)
    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "oracle.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ORACLE_COLUMNS)
        for policy in manifest.policies:
            st = analytic_packet_stats(cfg.with_policy(policy), position)
            w.writerow([fmt(v) for v in (policy, float(position[0]), float(position[1]), st.outage_prob,
                                         st.expected_transmissions, st.expected_channel_uses, frac)])
            print(f"{policy:<18}modes={'/'.join(st.tree.modes)} outage={st.outage_prob:.4g} "
                  f"E[tx]={st.expected_transmissions:.4f} E[uses]={st.expected_channel_uses:.1f}",
                  file=stdout)
    print(f"MC-eligible share of the macro area: {frac:.4f}", file=stdout)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="urllc-mc", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="flat key = value scenario file")
    p.add_argument("--policy", default="all", choices=ALL_POLICIES + ("all",))
    p.add_argument("--slots", type=int, help="arrival slots per replication")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--fading", choices=("on", "off"))
    p.add_argument("--oracle", action="store_true", help="analytic fading-free oracle instead of Monte Carlo")
    p.add_argument("--position", type=float, nargs=2, metavar=("X", "Y"),
                   help="user position for --oracle (default: config fixed_position or (250, 0))")
    p.add_argument("--jobs", type=int, default=1, help="parallel replications")
    return p


def main(argv=None, stdout=sys.stdout):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text()) if args.config else ScenarioConfig()
        over = {}
        if args.slots is not None:
            over["n_slots"] = args.slots
        if args.seed is not None:
            over["seed"] = args.seed
        if args.fading is not None:
            over["fading"] = args.fading == "on"
        cfg = replace(cfg, **over)
        if args.reps < 1:
            raise ConfigError("--reps must be >= 1")
        if not 0 <= cfg.seed + args.reps - 1 < 2**64:
            raise ConfigError("replication seeds overflow 64 bits")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    policies = ALL_POLICIES if args.policy == "all" else (args.policy,)
    manifest = RunManifest(cfg, policies, args.reps, cfg.seed, args.out, args.jobs)
    try:
        if args.oracle:
            pos = args.position or cfg.fixed_position or (250.0, 0.0)
            return run_oracle(manifest, tuple(pos), stdout)
        return run(manifest, stdout)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
