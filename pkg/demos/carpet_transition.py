"""A Bedford-McMullen carpet: constants, the spectrum's phase transition and box counting.

Run with ``python3 demos/carpet_transition.py``.
"""

import math

import numpy as np

from dimkit import FIGURE6_CARPET, box_profile, estimate_box, generate
from dimkit.analytic import assouad_spectrum_formula, carpet_constants, carpet_intermediate_bounds, lemma1_bounds

spec = FIGURE6_CARPET
k = carpet_constants(spec)
print(f"hausdorff={k.hausdorff:.6f} box={k.box:.6f} assouad={k.assouad:.6f} entropy={k.entropy:.6f}")
print(f"transition at log 2 / log 3 = {k.rho:.6f}; general bounds saturate at 1 - B/A = {1 - k.box / k.assouad:.6f}")

print("\ntheta  spectrum  general upper  intermediate lower..upper")
for t in (0.1, 0.3, 0.5, 0.63, 0.7, 0.9):
    s = assouad_spectrum_formula(spec, t)
    hi = lemma1_bounds(k.box, k.assouad, t)[1]
    lo_i, hi_i = carpet_intermediate_bounds(spec, t)
    print(f"{t:5.2f}  {s:8.4f}  {hi:13.4f}  {lo_i:.4f}..{min(hi_i, k.box):.4f}")

cloud = generate(spec, 2.0**-10)
fit = estimate_box(box_profile(cloud, 2.0 ** -np.arange(3, 11)))
print(f"\nlevel-10 cloud: {len(cloud)} points, box-count slope {fit.slope:.4f} (exact {k.box:.4f})")
print(f"3**10 = {3**10}, log(N)/log(3**10) = {math.log(len(cloud)) / math.log(3**10):.4f}")
