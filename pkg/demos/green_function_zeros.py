"""
Zeros of the averaged projected Green's function
================================================

Sampled Bloch eigenvalues act as poles. Between two neighbouring poles the
averaged Green's function runs from +inf down to -inf, so it has exactly
one zero there. The zeros inside spectral gaps are the ones of interest.
"""

from aahspec import ModelParams, build_cell, averaged_pgf, find_gap_zero
from aahspec.spectral import cell_gap_zeros, family_poles, family_spectrum, detect_gaps, gap_zeros

# a toy pole set
poles = [-3.0, -1.0, 2.0]
for a, b in zip(poles, poles[1:]):
    w = find_gap_zero(poles, (a, b))
    print(f"zero in ({a}, {b}): {w:.12f}, value {averaged_pgf(poles, w):.1e}")

# one cell: zeros inside each spectral gap
for gap, omega, res in cell_gap_zeros(build_cell(ModelParams(3, 8, delta=0.2))):
    print(f"  gap r={gap.index_r}: omega={omega:+.10f} residual={res:.1e}")

# the same for the union over delta
params = ModelParams(3, 8)
e, w = family_poles(params)
for gap, omega, res in gap_zeros(e, w, detect_gaps(family_spectrum(params))):
    print(f"  family gap r={gap.index_r}: omega={omega:+.10f}")
