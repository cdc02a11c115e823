"""Optimal error versus transmission for the three probe protocols (M = 8, N = 6)."""
import numpy as np

from memsl_imaging import Protocol, optimize

M, N = 8, 6

print(f"{'tau':>6} {'MEMSL':>10} {'indep. sq.':>11} {'coherent':>10} {'MEMSL r':>8} {'MEMSL alpha':>12}")
for tau in np.round(np.linspace(0.1, 1.0, 10), 2):
    sig = [optimize(p, M, N, tau).sigma_opt for p in Protocol]
    best = optimize(Protocol.MEMSL, M, N, tau)
    print(f"{tau:6.2f} {sig[0]:10.5f} {sig[1]:11.5f} {sig[2]:10.5f} {best.r_opt:8.4f} {best.alpha_opt:12.4f}")
