"""Numerical checks of the approximation bounds along convergent sequences.

Each check returns a :class:`BoundReport`. The irrational reference operator
is either evaluated directly from its bond pattern (for the Hamiltonian
distance) or replaced by a much deeper convergent (for Green's functions,
which need a periodic cell).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.linalg import eigvals_banded

from .greens import pgf_momentum_integrated
from .models import CHIRAL, ModelParams, UnitCellOperator, bloch_matrix, build_cell
from .rational import Convergent, alpha_value, convergents_of, resolve_alpha
from .spectral import family_spectrum, hausdorff_distance

__all__ = [
    "BoundReport",
    "delta_bound",
    "hamiltonian_distance",
    "delta_report",
    "samuelson_norm_check",
    "pgf_complex_deviation",
    "deviation_sweep",
    "schedule_q",
    "schedule_check",
    "duality_check",
    "reference_convergent",
    "bloch_norm",
    "TAU_DUAL",
]

TAU_DUAL = 1e-6


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one bound check.

    ``passed`` is ``margin > 0`` for checks inside their regime and ``None``
    for cases that are logged without a verdict. It serialises as ``pass``.
    """

    name: str
    p: int
    q: int
    delta: float | None
    omega: float | None
    eps: float | None
    measured: float
    bound: float | None
    margin: float | None
    passed: bool | None

    @classmethod
    def make(cls, name, p, q, measured, bound, *, delta=None, omega=None, eps=None,
             assert_pass: bool = True) -> "BoundReport":
        margin = None if bound is None else float(bound) - float(measured)
        passed = (margin > 0) if (assert_pass and margin is not None) else None
        return cls(name, int(p), int(q), delta, omega, eps, float(measured),
                   None if bound is None else float(bound), margin, passed)

    def as_record(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    @classmethod
    def from_record(cls, rec: dict) -> "BoundReport":
        d = dict(rec)
        d["passed"] = d.pop("pass")
        return cls(**d)


def delta_bound(q: int) -> float:
    """``2 pi sqrt(1 / (15 q))``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return 2.0 * math.pi * math.sqrt(1.0 / (15.0 * q))


def _check_convergent(conv: Convergent, alpha) -> None:
    a = resolve_alpha(alpha)
    if isinstance(a, Fraction) and a == conv.as_fraction():
        return
    depth = 8
    while True:
        cs = convergents_of(a, depth=depth)
        if any(c.p == conv.p and c.q == conv.q for c in cs):
            return
        if cs[-1].q > conv.q or len(cs) < depth:
            raise ValueError(f"{conv} is not a convergent of {alpha!r}")
        depth *= 2


def _irrational_bonds(alpha, x, delta_y: float, dps: int = 30) -> np.ndarray:
    with mpmath.workdps(dps):
        a = alpha_value(alpha, dps)
        return np.array([float(2 * mpmath.sin(mpmath.pi * a * int(k) + delta_y)) for k in x])


def hamiltonian_distance(conv: Convergent, alpha, delta_y: float = 0.0) -> float:
    """Operator norm of the chiral bond difference on one approximant cell.

    The two operators are compared on the open segment whose bonds are
    ``x -> x+1`` for ``x = 1..q_N``; the difference is a tridiagonal matrix
    with zero diagonal and entries
    ``2 sin(pi p/q x + delta_y) - 2 sin(pi alpha x + delta_y)``. Its
    largest singular value is returned.
    """
    _check_convergent(conv, alpha)
    x = np.arange(1, conv.q + 1)
    d = 2.0 * np.sin(np.pi * conv.p / conv.q * x + delta_y) - _irrational_bonds(alpha, x, delta_y)
    n = conv.q + 1
    H = np.zeros((n, n))
    i = np.arange(conv.q)
    H[i, i + 1] = d
    H[i + 1, i] = d
    return float(np.max(np.abs(np.linalg.eigvalsh(H))))


def delta_report(conv: Convergent, alpha, delta_y: float = 0.0) -> BoundReport:
    return BoundReport.make("hamiltonian_distance", conv.p, conv.q,
                            hamiltonian_distance(conv, alpha, delta_y), delta_bound(conv.q),
                            delta=float(delta_y))


def _interleave(L: int) -> np.ndarray:
    """Site order ``1, L, 2, L-1, ...``; a periodic chain then has bandwidth 2."""
    order = np.empty(L, dtype=int)
    order[0::2] = np.arange((L + 1) // 2)
    order[1::2] = L - 1 - np.arange(L // 2)
    pos = np.empty(L, dtype=int)
    pos[order] = np.arange(L)
    return pos


def bloch_norm(cell: UnitCellOperator, theta: float) -> float:
    """Spectral norm of the Bloch matrix, from the two extreme banded eigenvalues."""
    L = cell.period
    if L <= 2:
        return float(np.max(np.abs(np.linalg.eigvalsh(bloch_matrix(cell, theta)))))
    pos = _interleave(L)
    phase = np.exp(1j * theta)
    real = np.isrealobj(cell.M) and np.sin(theta) == 0
    dtype = float if real else complex
    ab = np.zeros((3, L), dtype=dtype)
    ab[2, pos] = np.diag(cell.M).real if real else np.diag(cell.M)
    r = np.arange(L)
    s = (r + 1) % L
    h = np.concatenate([np.diag(cell.M, 1), [cell.corner * (phase.real if real else phase)]])
    # h couples site r to s; store the upper-triangle entry of the permuted matrix
    i, j = pos[r], pos[s]
    up = i < j
    lo_, hi_ = np.where(up, i, j), np.where(up, j, i)
    ab[2 + lo_ - hi_, hi_] = np.where(up, h, np.conj(h)).astype(dtype)
    lo = eigvals_banded(ab, select="i", select_range=(0, 0))[0]
    hi = eigvals_banded(ab, select="i", select_range=(L - 1, L - 1))[0]
    return float(max(-lo, hi))


def samuelson_norm_check(cell: UnitCellOperator, n_theta: int = 0) -> BoundReport:
    """Largest Bloch spectral norm of a chiral cell against ``2 sqrt(q)``.

    ``q`` is the flux denominator, not the cell length. For a periodic
    tridiagonal chain ``det(E - H_theta)`` depends on ``theta`` only through
    ``cos theta``, so band extremes, and hence the norm, sit at ``0`` or
    ``pi``. These two phases are always used; ``n_theta > 0`` adds a uniform
    grid as a cross-check. Cells with ``q = 1`` are reported without a verdict.
    """
    params = cell.params
    if params is None or params.variant != CHIRAL:
        raise ValueError("samuelson_norm_check needs a chiral cell built from ModelParams")
    th = np.concatenate([[0.0, np.pi], 2 * np.pi * np.arange(n_theta) / max(n_theta, 1)])
    measured = max(bloch_norm(cell, t) for t in np.unique(th))
    return BoundReport.make("samuelson_norm", params.p, params.q, measured,
                            2.0 * math.sqrt(params.q), delta=float(params.delta),
                            assert_pass=params.q >= 2)


def reference_convergent(alpha, q_min: int) -> Convergent:
    """First convergent of ``alpha`` with ``q >= q_min`` (or the last one, for rationals)."""
    depth = 16
    while True:
        cs = convergents_of(alpha, depth=depth)
        for c in cs:
            if c.q >= q_min:
                return c
        if len(cs) < depth:
            return cs[-1]
        depth *= 2


def _chiral_block(conv: Convergent, omega, delta_y, window, n_k):
    cell = build_cell(ModelParams(conv.p, conv.q, delta=delta_y, variant=CHIRAL))
    if n_k is not None:
        n_k = max(n_k, 2 * cell.period)
    return pgf_momentum_integrated(cell, omega, n_k, sites=np.arange(window))


def pgf_complex_deviation(conv: Convergent, alpha, omega: float, eps: float, n_k: int | None = None,
                          q_ref: int | None = None, delta_y: float = 0.0,
                          window: int | None = None) -> tuple[float, float]:
    """Norms of the real and imaginary parts of a momentum-integrated pGF difference.

    Both chiral Green's functions are integrated over the Bloch phase at
    ``omega + i eps`` and ``omega - i eps`` and restricted to sites
    ``1..window`` (default ``q_N``). The reference is the first convergent
    of ``alpha`` with denominator at least ``q_ref`` (default ``20 q_N``).

    Returns
    -------
    (float, float)
        Largest singular values of the real and imaginary parts of the
        difference, maximised over the two signs of ``eps``.
    """
    if eps == 0:
        raise ValueError("eps must be non-zero")
    _check_convergent(conv, alpha)
    ref = reference_convergent(alpha, 20 * conv.q if q_ref is None else q_ref)
    window = conv.q if window is None else int(window)
    if not 1 <= window <= min(conv.q, ref.q):
        raise ValueError("window must lie in 1..q_N")
    re = im = 0.0
    for z in (omega + 1j * abs(eps), omega - 1j * abs(eps)):
        D = _chiral_block(conv, z, delta_y, window, n_k) - _chiral_block(ref, z, delta_y, window, n_k)
        re = max(re, float(np.linalg.norm(D.real, 2)))
        im = max(im, float(np.linalg.norm(D.imag, 2)))
    return re, im


def deviation_sweep(alpha, qs, omega: float, eps: float, q_ref: int, delta_y: float = 0.0,
                    tol: float | None = None, window: int | None = None) -> list[BoundReport]:
    """Real and imaginary deviation reports along convergents with denominators ``qs``.

    All convergents are compared on the same window, ``min(qs)`` sites by
    default, so successive values measure the same matrix block. ``tol`` is
    the target bound; without it the reports carry no verdict.
    """
    qs = sorted(qs)
    window = qs[0] if window is None else window
    convs = {c.q: c for c in _convergents_upto(alpha, max(qs))}
    out = []
    for q in qs:
        if q not in convs:
            raise ValueError(f"no convergent of {alpha!r} with q = {q}")
        c = convs[q]
        re, im = pgf_complex_deviation(c, alpha, omega, eps, q_ref=q_ref, delta_y=delta_y,
                                       window=window)
        for name, val in (("pgf_deviation_re", re), ("pgf_deviation_im", im)):
            out.append(BoundReport.make(name, c.p, c.q, val, tol, delta=float(delta_y),
                                        omega=float(omega), eps=float(eps)))
    return out


def _convergents_upto(alpha, q_max: int) -> list[Convergent]:
    last = reference_convergent(alpha, q_max)
    return convergents_of(alpha, q_max=last.q, depth=4 * last.q.bit_length() + 8)


def schedule_q(eps: float, tol: float) -> float:
    """``eps^-4 tol^-2``, the denominator beyond which deviations should be below ``tol``."""
    return eps ** -4 * tol ** -2


def schedule_check(alpha, eps: float, tol: float, omega: float = 0.0, delta_y: float = 0.0,
                   n_conv: int = 2) -> list[BoundReport]:
    """Deviation reports for the first ``n_conv`` convergents past the schedule."""
    q_min = schedule_q(eps, tol)
    convs = []
    depth = 16
    while len(convs) < n_conv:
        convs = [c for c in convergents_of(alpha, depth=depth) if c.q > q_min][:n_conv]
        depth *= 2
    out = []
    for c in convs:
        re, im = pgf_complex_deviation(c, alpha, omega, eps, delta_y=delta_y)
        for name, val in (("pgf_schedule_re", re), ("pgf_schedule_im", im)):
            out.append(BoundReport.make(name, c.p, c.q, val, tol, delta=float(delta_y),
                                        omega=float(omega), eps=float(eps)))
    return out


def duality_check(conv: Convergent, V: float = 1.0, n_theta: int = 16, tau: float = TAU_DUAL,
                  max_doublings: int = 3) -> BoundReport:
    """Hausdorff distance between the AAH family at ``p/q`` and the chiral family at ``p/q``.

    The chiral bonds ``2 sin(pi p/q x + delta_y)`` carry half the AAH phase
    step, so both families describe the same flux. Grids are doubled until
    the distance is below ``tau`` or ``max_doublings`` is reached. Outside
    ``V = 1`` the distance is logged without a verdict.
    """
    p, q = conv.p, conv.q
    aah = ModelParams(p, q, V=V)
    chiral = ModelParams(p, q, variant=CHIRAL)
    L = build_cell(chiral).period
    dist = math.inf
    for k in range(max_doublings + 1):
        a = family_spectrum(aah, n_delta=(8 * q) << k, n_theta=n_theta)
        b = family_spectrum(chiral, n_delta=(8 * L) << k, n_theta=n_theta)
        dist = hausdorff_distance(a, b)
        if dist < tau or V != 1.0:
            break
        n_theta *= 2
    return BoundReport.make("duality", p, q, dist, tau, assert_pass=V == 1.0)
