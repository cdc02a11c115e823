"""Reconstruct the three-lobe stand-in object with squeezed and coherent light.

With the optimal entangled source seven orders survive the noise and all three
lobes come back; a coherent probe with the same photon budget, averaged over many
repetitions, only supports five orders and loses the lobe structure.
"""
import math

import numpy as np

from memsl_imaging import Protocol, ProbeSource, build_basis, derive_dimensionless, optimize
from memsl_imaging import reconstruct, simulate_measurement, three_lobe_object
from memsl_imaging.objects import LOBE_CENTERS
from memsl_imaging.simulation import lobe_positions, lobes_match

M, N, TRIALS, SEED = 8, 6, 50000, 7

system = derive_dimensionless(10e-3, 780e-9, 50.8e-3, 300e-9)
basis = build_basis(system.c, 20)
obj = three_lobe_object()

runs = {
    "MEMSL": (optimize(Protocol.MEMSL, M, N).source(M), 7),
    "coherent": (ProbeSource(Protocol.COHERENT, M, math.sqrt(N)), 5),
}
for name, (src, Q) in runs.items():
    m = simulate_measurement(obj, src, basis, TRIALS, seed=SEED)
    rec = reconstruct(m, basis, Q, src, obj)
    lobes = lobe_positions(rec.grid, rec.phi_hat)
    print(f"{name:9s} Q = {Q}: lobes at {np.round(lobes, 3)}, "
          f"three-lobe match = {lobes_match(lobes, LOBE_CENTERS)}, "
          f"sigma (per shot) predicted {rec.sigma_predicted:.3g} / empirical {rec.sigma_empirical:.3g}")

print(f"true lobe centres: {LOBE_CENTERS}")
# With a non-zero phase the anti-squeezed b1 fluctuation multiplies the object's own
# coefficients, so the squeezed probe's empirical error sits above the closed form,
# which only counts the b2 noise; for a flat phase the two agree.
