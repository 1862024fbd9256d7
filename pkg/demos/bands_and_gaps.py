"""
Bands, gaps and gap labels of the critical AAH model
=====================================================

At rational flux p/q the model is periodic with q sites per cell. Its
spectrum is a union of q bands and every open gap carries an integer label.
"""

import numpy as np

from aahspec import (ModelParams, build_cell, compute_bands, spectrum_intervals,
                     detect_gaps, label_gaps, ids)
from aahspec.spectral import family_spectrum

# one cell at flux 1/3, delta = 0
params = ModelParams(1, 3)
bs = compute_bands(build_cell(params))
ss = spectrum_intervals(bs)
print("bands at 1/3:", np.round(ss.intervals, 6).tolist())
print("measure:", round(ss.measure, 6))

# the union over all phases delta is what the irrational limit sees
fam = family_spectrum(ModelParams(2, 5))
gaps = detect_gaps(fam)
for g, lab in zip(gaps, label_gaps(ModelParams(2, 5), gaps)):
    # m p + n q = r, and the IDS in the gap is r/q
    print(f"  gap r={g.index_r} ({g.lo:+.4f}, {g.hi:+.4f})  m={lab.m:+d} n={lab.n:+d}")

# integrated density of states is flat on gaps
print("IDS at 0 for flux 1/2:", ids(compute_bands(build_cell(ModelParams(1, 2))), 0.0))
