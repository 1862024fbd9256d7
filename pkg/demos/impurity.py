"""
A single impurity on a periodic chain
=====================================

A bound state appears where the local Green's function equals the inverse
impurity strength. On the uniform chain with strength 3 it lies at sqrt(13).
"""

import math

import numpy as np

from aahspec import ModelParams, build_cell, chain_cell, impurity_bound_states
from aahspec.spectral import compute_bands, detect_gaps, spectrum_intervals

free = chain_cell([0.0], [1.0])
(root,) = impurity_bound_states(free, 3.0, (2.0, math.inf))
print(f"uniform chain: {root:.12f}  sqrt(13) = {math.sqrt(13):.12f}")

# a dense finite chain agrees
H = np.diag(np.ones(1999), 1)
H = H + H.T
H[1000, 1000] = 3.0
print("dense 2000 sites:", np.linalg.eigvalsh(H)[-1])

# on a quasiperiodic approximant the impurity can also bind inside gaps
cell = build_cell(ModelParams(1, 3, delta=0.5))
for g in detect_gaps(spectrum_intervals(compute_bands(cell))):
    print(f"  gap ({g.lo:+.4f}, {g.hi:+.4f}):", impurity_bound_states(cell, -1.5, (g.lo, g.hi)))
