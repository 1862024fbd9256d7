"""
Certifying the approximation bounds
===================================

Each check returns a report with the measured quantity, its bound and the
margin. A failed report is kept, never hidden.
"""

import math

from aahspec.convergence import (delta_report, deviation_sweep, duality_check,
                                 samuelson_norm_check)
from aahspec.models import CHIRAL, ModelParams, build_cell
from aahspec.rational import convergents_of

# distance between the rational and irrational chiral Hamiltonians
for c in convergents_of("golden", q_max=233):
    r = delta_report(c, "golden", 0.3)
    print(f"  q={r.q:4d} measured={r.measured:.4f} bound={r.bound:.4f} pass={r.passed}")

# Bloch norm against 2 sqrt(q)
r = samuelson_norm_check(build_cell(ModelParams(5, 13, delta=0.7, variant=CHIRAL)))
print("norm", round(r.measured, 6), "<=", round(r.bound, 6))

# complex Green's function deviation shrinks along convergents
for r in deviation_sweep("golden", [13, 21, 34], 0.0, 0.1, 610):
    print(f"  {r.name} q={r.q} {r.measured:.4f}")

# AAH and chiral families give the same spectrum
print("duality distance:", duality_check(convergents_of("golden", q_max=13)[-1]).measured)
