"""Latency is quantised by the HARQ round trip.

With a 6-TTI budget and a 2-TTI round trip a packet gets at most three
attempts, landing at 1, 3 or 5 TTIs. The CCDF is therefore a staircase
whose first step is the first-attempt error rate.
"""

from urllc_mc import ScenarioConfig, finalize, run_policies

cfg = ScenarioConfig(n_slots=200_000, seed=3)
for name, rep in run_policies(cfg).items():
    k = finalize(rep)
    steps = "  ".join(f"P(>{lat:.3f} ms)={c:.2e}" for lat, c in k.ccdf_points)
    print(f"{name:<18}{steps}")
