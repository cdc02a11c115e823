"""Walk through the M = 8, N = 6 worked example.

Derives the dimensionless bandwidth of the 4-f system, the optimal squeezing and
displacement for entangled multi-mode squeezed light, the equivalent coherent
photon budget and the resolution gain at seven retained orders.

    python3 demos/worked_example.py
"""
import math

from memsl_imaging import Protocol, build_basis, derive_dimensionless, optimize, resolution, sigma_lossless

M, N = 8, 6

system = derive_dimensionless(f=10e-3, wavelength=780e-9, d=50.8e-3, Y=300e-9)
print(f"c = {system.c:.4f}   Rayleigh length = {system.rayleigh * 1e9:.1f} nm"
      f"   Shannon number = {system.shannon:.3f}")

basis = build_basis(system.c, 10)
print("\n j   lambda_j       A_j")
for j in range(11):
    print(f"{j:2d}   {basis.eigenvalues[j]:.4e}   {basis.couplings[j]:+.4e}")

opt = optimize(Protocol.MEMSL, M, N)
print(f"\noptimal MEMSL source: e^-r = {math.exp(-opt.r_opt):.4f}, alpha = {opt.alpha_opt:.3f},"
      f" squeezing {opt.squeezing_db:.1f} dB")

# the coherent budget that matches the entangled source at the same cutoff
for Q in (5, 7):
    memsl = sigma_lossless(Protocol.MEMSL, basis, Q, M, N)
    coh = sigma_lossless(Protocol.COHERENT, basis, Q, M, 294)
    print(f"Q = {Q}: sigma MEMSL(N=6) = {memsl:.4g}, sigma coherent(N=294) = {coh:.4g}, ratio {coh / memsl:.4f}")
print(f"coherent photons needed: {M * 294} against {M * N} entangled")

for Q in (1, 3, 5, 7, 9):
    print(f"Q = {Q}: resolution {resolution(system, Q) * 1e9:.1f} nm")
