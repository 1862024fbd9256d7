"""
Hofstadter butterfly
====================

Spectra of the critical model for every reduced p/q up to a maximal
denominator, written as plot-ready interval rows.
"""

import os
import tempfile

from aahspec.io import interval_table, write_table
from aahspec.spectral import butterfly

rows = butterfly(12)
print(len(rows), "intervals")
for r in rows[:6]:
    print("  ", r)

path = os.path.join(tempfile.gettempdir(), "butterfly_q12.csv")
write_table(interval_table(rows), path)
print("written to", path)

# plotting is left to the reader, e.g. with matplotlib:
#   for p, q, V, lo, hi in rows: plt.plot([lo, hi], [p / q, p / q])
