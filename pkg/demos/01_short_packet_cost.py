"""How many channel uses does a 256-bit packet need?

Walks the finite-blocklength kernel: capacity, dispersion, the blocklength
needed for a target error rate, and how that cost moves with SNR.
"""

import numpy as np

from urllc_mc import fblmath as fbl

L = 256

print("SNR [dB]   C [b/use]   V       R(pe=0.1)   R(pe=1e-5)   L/C")
for snr_db in (-3, 0, 3, 10, 20):
    g = fbl.db_to_linear(snr_db)
    c, v = fbl.capacity(g), fbl.dispersion(g)
    print(f"{snr_db:>7}   {c:9.4f}   {v:.4f}  {fbl.channel_usage(L, g, 0.1):10.1f}"
          f"   {fbl.channel_usage(L, g, 1e-5):10.1f}   {L / c:6.1f}")

# A block sized for 10% error at the edge SNR; what happens after chase combining?
edge = fbl.db_to_linear(3.0)
R = fbl.channel_usage(L, edge, 0.1)
print(f"\nblock of {R:.1f} uses at 3 dB")
for k in (1, 2, 3):
    print(f"  after {k} combined copies: error {fbl.outage_probability(R, k * edge, L):.3e}")

# the approximation inverts itself
pe = np.logspace(-9, -1, 5)
print("\nround trip:", fbl.outage_probability(fbl.channel_usage(L, edge, pe), edge, L) / pe)
