"""Mandelbrot percolation: surviving realisations, box counting and the phi-Assouad dichotomy.

Run with ``python3 demos/percolation_regimes.py``.
"""

import numpy as np

from dimkit import ExtinctionError, Identity, LogCorrection, Percolation, PowerLaw, box_profile, estimate_box, generate
from dimkit.analytic import dims, percolation_phi_regime

base = Percolation(2, 2, 0.8)
print(f"almost-sure box dimension {dims(base).upper_box:.4f}, Assouad dimension {dims(base).assouad:g}")

slopes = []
for seed in range(12):
    try:
        cloud = generate(Percolation(2, 2, 0.8, seed), 2.0**-10)
    except ExtinctionError:
        print(f"seed {seed}: extinct")
        continue
    slopes.append(estimate_box(box_profile(cloud, 2.0 ** -np.arange(3, 11))).slope)
print(f"{len(slopes)} survivors, mean box-count slope {np.mean(slopes):.4f}")

for phi in (Identity(), PowerLaw(0.5), LogCorrection(1.0)):
    print(f"{phi!r}: {percolation_phi_regime(phi)}")
