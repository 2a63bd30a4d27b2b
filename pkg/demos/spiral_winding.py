"""How fast can an interval wind onto a polynomial spiral? Spectrum-based and sharp bounds.

Run with ``python3 demos/spiral_winding.py``.
"""

from fractions import Fraction

import numpy as np

from dimkit import SpectrumCurve, Spiral
from dimkit.analytic import HolderExponents, assouad_spectrum_formula, holder_transform, winding_bounds

p = 2
print(f"spectrum of the p={p} spiral: transition at {Fraction(p, p + 1)}")
for t in (0.2, 0.5, 0.66, 0.7):
    print(f"  theta={t:4.2f}  {assouad_spectrum_formula(Spiral(p), t):.4f}")

# an (alpha, 1)-Hoelder image of an interval has spectrum at most the transformed bound
ts = np.linspace(0.001, 0.999, 999)
interval = SpectrumCurve(ts, np.ones(ts.size), "analytic")
grid = np.linspace(0.01, 0.66, 66)
target = np.array([assouad_spectrum_formula(Spiral(p), t) for t in grid])
for alpha in (0.6, 2 / 3, 0.75, 0.8):
    hi = holder_transform(interval, HolderExponents(alpha, 1.0), grid)[1].values
    verdict = "possible" if np.all(target <= hi + 1e-12) else "ruled out"
    print(f"alpha={alpha:.3f}: {verdict}")

for beta in (1, 2, 5):
    sb, sh = winding_bounds(p, beta)
    print(f"beta={beta}: spectrum bound {sb}, sharp bound {sh}")
