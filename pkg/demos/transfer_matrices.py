"""
Reduced transfer matrices
=========================

The intercell hopping has rank one, so propagation across a cell reduces
to a 2x2 map built from four Green's function elements. Its eigenvalues
sit on the unit circle inside bands and off it in gaps.
"""

import numpy as np

from aahspec import ModelParams, build_cell, transfer_matrix_at
from aahspec.spectral import compute_bands, spectrum_intervals

cell = build_cell(ModelParams(2, 5, delta=0.4))
ss = spectrum_intervals(compute_bands(cell))
print("bands:", np.round(ss.intervals, 4).tolist())

for E in np.linspace(-3.5, 3.5, 15):
    T = transfer_matrix_at(cell, E)
    lam = T.eigenvalues
    # the product of eigenvalues is one away from deficient points
    print(f"  E={E:+.2f}  {T.classification.value:12s} |l|={np.abs(lam).round(4)}"
          f"  det={abs(np.prod(lam)):.12f}")
