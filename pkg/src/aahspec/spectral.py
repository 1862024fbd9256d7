"""Band structures, spectra as interval sets, IDS, gap labels and the butterfly.

Two kinds of spectra are handled. A single cell gives the spectrum of one
periodic operator (union over the Bloch phase). A *family* is the union over
the phase ``delta`` as well, which is what the two-dimensional parent model
sees; all butterfly and duality outputs use the family spectrum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .greens import find_gap_zero, merge_poles, sampled_poles
from .models import AAH, CHIRAL, ModelParams, UnitCellOperator, bloch_stack, build_cell, chiral_period

__all__ = [
    "BandStructure",
    "SpectrumSet",
    "Gap",
    "GapLabel",
    "compute_bands",
    "family_bands",
    "spectrum_intervals",
    "ids",
    "family_ids",
    "detect_gaps",
    "gap_label",
    "label_gaps",
    "butterfly",
    "butterfly_fluxes",
    "hausdorff_distance",
    "family_spectrum",
    "family_poles",
    "gap_zeros",
    "cell_gap_zeros",
]

GAP_THRESHOLD = 1e-8


@dataclass(frozen=True)
class BandStructure:
    """Sorted Bloch energies and per-band extremes.

    ``energies`` has one row per sample (a Bloch phase, or a ``(delta, theta)``
    pair for families) and one column per band. ``edges[j]`` is ``(min, max)``
    of band ``j`` after refinement, so it may lie slightly outside the samples.
    """

    energies: np.ndarray
    edges: np.ndarray
    thetas: np.ndarray | None = None

    @property
    def n_bands(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class SpectrumSet:
    intervals: tuple
    band_counts: tuple = ()

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        for (a, b), (c, _) in zip(iv, iv[1:]):
            if not a <= b < c:
                raise ValueError("intervals must be sorted and disjoint")
        if iv and iv[-1][0] > iv[-1][1]:
            raise ValueError("interval with lo > hi")
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "band_counts", tuple(int(c) for c in self.band_counts))

    @property
    def measure(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    def __len__(self):
        return len(self.intervals)

    def contains(self, E: float, tol: float = 0.0) -> bool:
        return any(a - tol <= E <= b + tol for a, b in self.intervals)

    def reflected(self) -> "SpectrumSet":
        return SpectrumSet(tuple((-b, -a) for a, b in reversed(self.intervals)),
                           tuple(reversed(self.band_counts)))


@dataclass(frozen=True)
class Gap:
    lo: float
    hi: float
    index_r: int
    resolved: bool = True

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def interval(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class GapLabel:
    m: int
    n: int
    ids_value: Fraction


def compute_bands(cell: UnitCellOperator, n_theta: int = 64) -> BandStructure:
    """Eigenvalues on ``theta_j = 2 pi j / n_theta`` plus exact band extremes.

    The extremes come from ``theta = 0`` and ``theta = pi``, where every band of
    a nearest-neighbour cell attains its minimum and maximum.
    """
    if n_theta < 16:
        raise ValueError("n_theta must be >= 16")
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    E = np.linalg.eigvalsh(bloch_stack(cell, th))
    ext = np.linalg.eigvalsh(bloch_stack(cell, [0.0, np.pi]))
    edges = np.column_stack([np.minimum(E.min(0), ext.min(0)), np.maximum(E.max(0), ext.max(0))])
    return BandStructure(E, edges, th)


def _family_arrays(params: ModelParams, deltas):
    """On-site energies and bonds of the cells at each ``delta``, shape ``(n_delta, L)``."""
    deltas = np.asarray(deltas, dtype=float)[:, None]
    if params.variant == CHIRAL:
        L = chiral_period(params.p, params.q)
        x = np.arange(1, L + 1)[None]
        bonds = 2.0 * np.sin(np.pi * params.p / params.q * x + deltas)
        diag = np.zeros_like(bonds)
    else:
        x = np.arange(1, params.q + 1)[None]
        diag = 2.0 * params.V * np.cos(2.0 * np.pi * params.p / params.q * x + deltas)
        bonds = np.full_like(diag, params.t)
    return diag, bonds


def _family_bloch(params: ModelParams, deltas, thetas) -> np.ndarray:
    """Bloch matrices for every ``(delta, theta)``, shape ``(n_delta, n_theta, L, L)``."""
    diag, bonds = _family_arrays(params, deltas)
    nd, L = diag.shape
    ph = np.exp(1j * np.asarray(thetas, dtype=float))
    H = np.zeros((nd, len(ph), L, L), dtype=complex)
    i = np.arange(L)
    H[:, :, i, i] = diag[:, None, :]
    if L > 1:
        j = np.arange(L - 1)
        H[:, :, j, j + 1] = bonds[:, None, :-1]
        H[:, :, j + 1, j] = bonds[:, None, :-1]
    c = bonds[:, None, -1] * ph[None]
    H[:, :, 0, L - 1] += c
    H[:, :, L - 1, 0] += np.conj(c)
    return H


def _edge_values(params: ModelParams, deltas) -> np.ndarray:
    """Band values at ``theta in {0, pi}`` for each delta: shape ``(n_delta, 2, L)``."""
    return np.linalg.eigvalsh(_family_bloch(params, deltas, [0.0, np.pi]))


def _refine_family_edges(params, deltas, ev, h_min=1e-10, n_local=9):
    """Zoom in on the delta-extremes of each band edge, all bands at once.

    ``ev`` holds the grid values from :func:`_edge_values`. Each of the
    ``2 x 2 x L`` (theta, min/max, band) extremes gets a local grid that is
    re-centred on its best point and shrunk by a factor 4 per iteration.
    """
    L = ev.shape[-1]
    h = deltas[1] - deltas[0] if len(deltas) > 1 else 2 * np.pi
    lo_idx = ev.reshape(len(deltas), 2 * L)  # (delta, theta*band)
    centres_min = deltas[np.argmin(lo_idx, axis=0)]
    centres_max = deltas[np.argmax(lo_idx, axis=0)]
    best_min = lo_idx.min(axis=0)
    best_max = lo_idx.max(axis=0)
    offs = np.linspace(-1.0, 1.0, n_local)
    col = np.arange(2 * L)
    while h > h_min:
        dmin = centres_min[:, None] + h * offs[None]
        dmax = centres_max[:, None] + h * offs[None]
        vals = _edge_values(params, np.concatenate([dmin.ravel(), dmax.ravel()]))
        vals = vals.reshape(2, 2 * L, n_local, 2 * L)
        # own column only: candidate k of extreme c evaluates column c
        vmin = vals[0][col, :, col]
        vmax = vals[1][col, :, col]
        imin = np.argmin(vmin, axis=1)
        imax = np.argmax(vmax, axis=1)
        cand_min = vmin[col, imin]
        cand_max = vmax[col, imax]
        better = cand_min < best_min
        best_min = np.where(better, cand_min, best_min)
        centres_min = np.where(better, dmin[col, imin], centres_min)
        better = cand_max > best_max
        best_max = np.where(better, cand_max, best_max)
        centres_max = np.where(better, dmax[col, imax], centres_max)
        h *= 0.25
    bmin = best_min.reshape(2, L).min(axis=0)
    bmax = best_max.reshape(2, L).max(axis=0)
    return np.column_stack([bmin, bmax])


def _corner_edges(params: ModelParams) -> np.ndarray:
    # For the AAH cell det(E - H) = P(E) - 2 t^q cos(theta) - 2 V^q cos(q delta),
    # so every band is extremal at theta in {0, pi} and q delta in {0, pi}.
    ev = _edge_values(params, [0.0, np.pi / params.q]).reshape(-1, params.q)
    return np.column_stack([ev.min(0), ev.max(0)])


def family_bands(params: ModelParams, n_delta: int | None = None, n_theta: int = 32,
                 refine: bool | str = True) -> BandStructure:
    """Band structure of the whole ``delta`` family at fixed flux.

    Samples are the ``(delta, theta)`` product grid, ``n_delta`` defaults to
    ``8 L``.

    Parameters
    ----------
    refine : bool or {"corner", "zoom"}
        How the band extremes over ``delta`` are located. ``"corner"`` uses
        the phases ``delta in {0, pi/q}`` where AAH bands are extremal, which
        is exact. ``"zoom"`` runs a local search from the best grid points and
        works for either variant. ``True`` picks ``"corner"`` for AAH cells and
        ``"zoom"`` otherwise; ``False`` keeps the raw grid extremes.
    """
    L = build_cell(params).period
    if n_delta is None:
        n_delta = 8 * L
    deltas = 2 * np.pi * np.arange(n_delta) / n_delta
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    E = np.linalg.eigvalsh(_family_bloch(params, deltas, th)).reshape(-1, L)
    if refine is True:
        refine = "corner" if params.variant == AAH else "zoom"
    if refine == "corner":
        if params.variant != AAH:
            raise ValueError("corner refinement only applies to AAH cells")
        edges = _corner_edges(params)
    elif refine == "zoom":
        edges = _refine_family_edges(params, deltas, _edge_values(params, deltas))
    elif refine is False:
        ev = _edge_values(params, deltas)
        flat = ev.reshape(-1, L)
        edges = np.column_stack([flat.min(0), flat.max(0)])
    else:
        raise ValueError(f"unknown refine mode {refine!r}")
    edges = np.column_stack([np.minimum(edges[:, 0], E.min(0)), np.maximum(edges[:, 1], E.max(0))])
    return BandStructure(E, edges, th)


def spectrum_intervals(bs: BandStructure) -> SpectrumSet:
    """Union of the per-band ``[min, max]``, merging overlapping bands."""
    order = np.argsort(bs.edges[:, 0], kind="stable")
    out = []
    counts = []
    for lo, hi in bs.edges[order]:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
            counts[-1] += 1
        else:
            out.append([lo, hi])
            counts.append(1)
    return SpectrumSet(tuple(map(tuple, out)), tuple(counts))


def family_spectrum(params: ModelParams, **kw) -> SpectrumSet:
    return spectrum_intervals(family_bands(params, **kw))


def ids(bs: BandStructure, E):
    """Fraction of sampled band energies ``<= E`` (scalar or array ``E``)."""
    flat = np.sort(bs.energies, axis=None)
    frac = np.searchsorted(flat, np.asarray(E, dtype=float), side="right") / flat.size
    return float(frac) if np.ndim(frac) == 0 else frac


def family_ids(params: ModelParams, E, tol: float = 1e-9, n_theta: int = 16,
               max_doublings: int = 6):
    """IDS of the ``delta`` family by counting, doubling both grids until stable to ``tol``.

    ``E`` may be an array; all energies share the grids and the stopping test.
    """
    L = build_cell(params).period
    n_delta = 4 * L
    prev = ids(family_bands(params, n_delta, n_theta, refine=False), E)
    for _ in range(max_doublings):
        n_delta *= 2
        n_theta *= 2
        cur = ids(family_bands(params, n_delta, n_theta, refine=False), E)
        if np.max(np.abs(np.asarray(cur) - prev)) < tol:
            return cur
        prev = cur
    return prev


def detect_gaps(ss: SpectrumSet, threshold: float = GAP_THRESHOLD,
                include_unresolved: bool = False) -> list[Gap]:
    """Gaps between consecutive intervals, with the number of bands below.

    Gaps narrower than ``threshold`` are returned only with
    ``include_unresolved=True`` and then carry ``resolved=False``.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    counts = ss.band_counts or (1,) * len(ss.intervals)
    gaps = []
    below = 0
    for (a, b), (c, _), n in zip(ss.intervals, ss.intervals[1:], counts):
        below += n
        ok = c - b > threshold
        if ok or include_unresolved:
            gaps.append(Gap(b, c, below, ok))
    return gaps


def gap_label(p: int, q: int, r: int) -> GapLabel:
    """Integers ``(m, n)`` with ``m p + n q = r`` and ``|m| <= q/2`` (``m > 0`` on ties)."""
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not reduced")
    if not 1 <= r <= q - 1:
        raise ValueError("r must satisfy 1 <= r <= q-1")
    m = (r * pow(p, -1, q)) % q
    if 2 * m > q:
        m -= q
    n, rem = divmod(r - m * p, q)
    assert rem == 0
    return GapLabel(m, n, Fraction(r, q))


def label_gaps(params: ModelParams, gaps) -> list[GapLabel]:
    """Labels for gaps of a family spectrum, using its band count per cell."""
    if params.variant != AAH:
        raise ValueError("gap labels are defined for AAH cells of length q")
    return [gap_label(params.p, params.q, g.index_r) for g in gaps]


def family_poles(params: ModelParams, n_delta: int | None = None, n_theta: int = 64):
    """Bloch eigenvalues over a ``(delta, theta)`` grid, merged with weights.

    ``n_delta`` is rounded up to a multiple of ``2q`` so that the phases
    ``0`` and ``pi/q`` are on the grid; with even ``n_theta`` so are
    ``theta = 0, pi``. AAH family band edges are therefore poles.
    """
    if n_theta % 2:
        raise ValueError("n_theta must be even")
    step = 2 * params.q
    n_delta = step * max(1, -(-(n_delta or 8 * params.q) // step))
    deltas = 2 * np.pi * np.arange(n_delta) / n_delta
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    E = np.linalg.eigvalsh(_family_bloch(params, deltas, th))
    return merge_poles(E.ravel())


def gap_zeros(poles, weights, gaps) -> list[tuple]:
    """Zero of the averaged pGF in each gap, bracketed by the enclosing poles.

    Returns ``(gap, omega, residual)`` triples. The bracket is the largest
    pole at or below ``gap.lo`` and the smallest at or above ``gap.hi``.
    """
    poles = np.asarray(poles, dtype=float)
    out = []
    for g in gaps:
        below = poles[poles <= g.lo + 1e-12 * max(1.0, abs(g.lo))]
        above = poles[poles >= g.hi - 1e-12 * max(1.0, abs(g.hi))]
        if below.size == 0 or above.size == 0:
            raise ValueError(f"gap ({g.lo}, {g.hi}) is not bracketed by poles")
        w, res = find_gap_zero(poles, (below.max(), above.min()), weights, full_output=True)
        out.append((g, w, res))
    return out


def cell_gap_zeros(cell: UnitCellOperator, n_theta: int = 256,
                   threshold: float = GAP_THRESHOLD) -> list[tuple]:
    """Averaged-pGF zeros in every spectral gap of one periodic cell."""
    gaps = detect_gaps(spectrum_intervals(compute_bands(cell, max(n_theta, 16))), threshold)
    e, w = sampled_poles(cell, n_theta)
    return gap_zeros(e, w, gaps)


def butterfly_fluxes(q_max: int):
    """Reduced fractions ``p/q`` in ``[0, 1]`` with ``q <= q_max``, sorted by ``(q, p)``."""
    return [(p, q) for q in range(1, q_max + 1) for p in range(0, q + 1) if math.gcd(p, q) == 1]


def _butterfly_row(args):
    p, q, V, t, n_theta = args
    ss = family_spectrum(ModelParams(p, q, V=V, t=t), n_theta=n_theta)
    return p, q, ss


def butterfly(q_max: int, V: float = 1.0, n_theta: int = 16, t: float = 1.0,
              workers: int = 1) -> list[tuple]:
    """Family spectra of the AAH model for every flux ``p/q`` with ``q <= q_max``.

    Returns rows ``(p, q, V, lo, hi)``, one per spectral interval, ordered by
    ``(q, p, lo)`` regardless of ``workers``.
    """
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    jobs = [(p, q, V, t, n_theta) for p, q in butterfly_fluxes(q_max)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_butterfly_row, jobs))
    else:
        results = [_butterfly_row(j) for j in jobs]
    rows = []
    for p, q, ss in results:
        for lo, hi in ss.intervals:
            rows.append((p, q, V, lo, hi))
    return rows


def _dist_to_set(x, intervals):
    best = math.inf
    for a, b in intervals:
        if a <= x <= b:
            return 0.0
        best = min(best, a - x if x < a else x - b)
    return best


def _directed(A, B):
    pts = []
    for a, b in A:
        pts += [a, b]
        # the farthest point from B inside [a, b] is an endpoint or a mid-gap point of B
        for (_, b1), (a2, _) in zip(B, B[1:]):
            m = 0.5 * (b1 + a2)
            if a < m < b:
                pts.append(m)
    return max(_dist_to_set(x, B) for x in pts)


def hausdorff_distance(a: SpectrumSet, b: SpectrumSet) -> float:
    """Symmetric Hausdorff distance between two finite unions of closed intervals."""
    A = list(a.intervals)
    B = list(b.intervals)
    if not A or not B:
        raise ValueError("Hausdorff distance needs non-empty sets")
    return max(_directed(A, B), _directed(B, A))
