"""Rational approximants of the almost-Mathieu operator: transfer matrices,
projected Green's functions, gap labels and convergence checks."""

from .rational import (GOLDEN, SQRT2, ContinuedFraction, Convergent, QuadraticSurd,
                       cf_expand, convergents, convergents_of, diophantine_error_bound)
from .models import (AAH, CHIRAL, ModelParams, UnitCellOperator, add_impurity, bloch_matrix,
                     build_aah_cell, build_cell, build_chiral_cell, chain_cell)
from .transfer import (EnergyClass, PropagationBlocked, TransferMatrix2x2, classify_energy,
                       full_tme, reduced_svd, reduced_tm, transfer_matrix_at)
from .greens import (PoleError, averaged_pgf, find_gap_zero, impurity_bound_states,
                     pgf_intracell, pgf_momentum_integrated)
from .spectral import (BandStructure, Gap, GapLabel, SpectrumSet, butterfly, compute_bands,
                       detect_gaps, family_bands, family_spectrum, gap_label, hausdorff_distance, ids,
                       label_gaps, spectrum_intervals)

__version__ = "0.1.0"
