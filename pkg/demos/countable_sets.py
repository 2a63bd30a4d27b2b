"""Countable sets {n**-p}: numeric spectrum and intermediate dimensions against closed forms.

Run with ``python3 demos/countable_sets.py``.
"""

import numpy as np

from dimkit import Countable, estimate_assouad_spectrum, estimate_intermediate_upper, generate
from dimkit.analytic import assouad_spectrum_formula, dims, intermediate_formula_or_bounds

thetas = np.array([0.2, 0.4, 0.6, 0.8])
r_list = [1e-4, 1e-5, 1e-6]

for p in (1.0, 4.0):
    spec = Countable(p)
    cloud = generate(spec, 1e-6)
    rep = dims(spec)
    print(f"p={p:g}: {len(cloud)} points, box={rep.upper_box:.4f}, assouad={rep.assouad:g}")
    curve = estimate_assouad_spectrum(cloud, thetas)
    print("  theta  spectrum(numeric)  spectrum(exact)  intermediate(numeric)  intermediate(exact)")
    for t, v in zip(thetas, curve.values):
        exact = assouad_spectrum_formula(spec, t)
        up = estimate_intermediate_upper(cloud, t, r_list)
        ex = intermediate_formula_or_bounds(spec, t)[0]
        print(f"  {t:5.2f}  {v:17.3f}  {exact:15.3f}  {up:21.3f}  {ex:19.3f}")
    # the spectrum reaches 1 once theta passes p / (1 + p)
    print(f"  spectrum saturates at theta = {p / (1 + p):.3f}\n")
