"""Projected Green's functions of periodic chains.

Three flavours are provided:

* the intra-cell resolvent ``(omega - M)^-1`` projected on the boundary
  selectors that enter the reduced transfer matrix,
* the momentum-integrated resolvent ``int dtheta/2pi (omega - H_theta)^-1``,
  i.e. the cell block of the infinite-chain resolvent,
* the translation-averaged pole sum ``(1/L) sum_xi 1/(omega - E_xi)`` over a
  sampled spectrum, together with its in-gap zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .models import UnitCellOperator, bloch_matrix, bloch_stack, add_impurity
from .transfer import reduced_svd

__all__ = [
    "PoleError",
    "PGFSample",
    "pgf_intracell",
    "band_edges",
    "pgf_momentum_integrated",
    "averaged_pgf",
    "find_gap_zero",
    "merge_poles",
    "sampled_poles",
    "impurity_bound_states",
    "local_green",
]

POLE_TOL = 1e-12
AVG_POLE_TOL = 1e-13
DENSE_MAX = 64


class PoleError(ValueError):
    """``omega`` sits on (or numerically at) a pole of the resolvent."""

    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class PGFSample:
    omega: complex
    g_vv: complex
    g_vw: complex
    g_wv: complex
    g_ww: complex
    full: np.ndarray | None = None


def pgf_intracell(cell: UnitCellOperator, omega, full: bool = False) -> PGFSample:
    """Boundary elements of ``G(omega) = (omega - M)^-1``.

    The two selector columns are obtained by a linear solve; the full matrix is
    only formed when ``full=True``.

    Raises
    ------
    PoleError
        If ``omega`` is within ``1e-12`` of an eigenvalue of ``M``.
    """
    M = cell.M
    L = cell.period
    ev = np.linalg.eigvalsh(M)
    k = int(np.argmin(np.abs(ev - omega)))
    if abs(ev[k] - omega) < POLE_TOL:
        raise PoleError(f"omega={omega!r} is an eigenvalue of M", ev[k])
    svd = reduced_svd(cell.J) if np.any(cell.J) else None
    if svd is None:
        V = np.zeros(L); V[0] = (-1.0) ** L
        W = np.zeros(L); W[-1] = (-1.0) ** L
    else:
        V, W = svd.V, svd.W
    dtype = np.result_type(M, omega, V, W)
    A = omega * np.eye(L, dtype=dtype) - M
    if full:
        G = np.linalg.inv(A) if L <= DENSE_MAX else np.linalg.solve(A, np.eye(L, dtype=dtype))
        X = G @ np.column_stack([V, W])
    else:
        G = None
        X = np.linalg.solve(A, np.column_stack([V, W]).astype(dtype))
    GV, GW = X[:, 0], X[:, 1]
    Vc, Wc = V.conj(), W.conj()
    return PGFSample(omega, Vc @ GV, Vc @ GW, Wc @ GV, Wc @ GW, G)


def band_edges(cell: UnitCellOperator) -> np.ndarray:
    """Per-band ``(min, max)`` of a chain cell, shape ``(L, 2)``.

    For a nearest-neighbour cell ``det(E - H_theta)`` depends on ``theta`` only
    through ``cos theta``, so every band is monotone in ``cos theta`` and its
    extremes sit at ``theta = 0`` and ``theta = pi``.
    """
    e0 = np.linalg.eigvalsh(bloch_matrix(cell, 0.0))
    e1 = np.linalg.eigvalsh(bloch_matrix(cell, np.pi))
    return np.column_stack([np.minimum(e0, e1), np.maximum(e0, e1)])


def _check_contour(cell, omega):
    if abs(np.imag(omega)) > 0:
        return
    w = float(np.real(omega))
    for lo, hi in band_edges(cell):
        if lo - POLE_TOL <= w <= hi + POLE_TOL:
            raise PoleError(f"omega={w!r} lies inside band [{lo}, {hi}]", (lo, hi))


def _dense_block_mean(cell, omega, thetas, sites):
    H = bloch_stack(cell, thetas)
    L = cell.period
    A = omega * np.eye(L)[None] - H
    if sites is None:
        X = np.linalg.inv(A)
        return X.mean(axis=0)
    rhs = np.zeros((L, len(sites)), dtype=complex)
    rhs[sites, np.arange(len(sites))] = 1.0
    X = np.linalg.solve(A, np.broadcast_to(rhs, (len(thetas),) + rhs.shape))
    return X[:, sites, :].mean(axis=0)


def _sparse_block_mean(cell, omega, thetas, sites):
    L = cell.period
    b = cell.bonds()
    d = np.real_if_close(np.diag(cell.M)).astype(complex)
    if sites is None:
        sites = np.arange(L)
    rhs = np.zeros((L, len(sites)), dtype=complex)
    rhs[sites, np.arange(len(sites))] = 1.0
    base = sp.diags([omega - d, -b[:-1], -np.conj(b[:-1])], [0, 1, -1], format="lil", dtype=complex)
    acc = np.zeros((len(sites), len(sites)), dtype=complex)
    for th in thetas:
        A = base.copy()
        A[0, L - 1] -= b[-1] * np.exp(1j * th)
        A[L - 1, 0] -= np.conj(b[-1]) * np.exp(-1j * th)
        X = spla.splu(A.tocsc()).solve(rhs)
        acc += X[sites, :]
    return acc / len(thetas)


def _block_mean(cell, omega, thetas, sites):
    if cell.period <= DENSE_MAX:
        return _dense_block_mean(cell, omega, thetas, sites)
    return _sparse_block_mean(cell, omega, thetas, sites)


def pgf_momentum_integrated(cell: UnitCellOperator, omega, n_k: int | None = None, *,
                            sites=None, tol: float = 1e-12, max_nk: int = 2 ** 16,
                            return_nk: bool = False):
    """``int dtheta/2pi (omega - H_theta)^-1`` by the periodic trapezoid rule.

    The grid starts at ``n_k`` points and is doubled (reusing the previous
    nodes) until two successive estimates agree to ``tol`` in max-norm, or
    ``max_nk`` is reached.

    Parameters
    ----------
    cell : UnitCellOperator
    omega : complex
        Off the real axis, or real and outside every band.
    n_k : int, optional
        Initial grid size, at least ``2 L`` when given. Defaults to
        ``min(max(2 L, 8), 64)``.
    sites : sequence of int, optional
        0-based sites of the block to return. All sites by default.

    Returns
    -------
    ndarray
        The ``(len(sites), len(sites))`` block. With ``return_nk`` also the
        final grid size.

    Raises
    ------
    PoleError
        If ``omega`` is real and inside a band.
    """
    L = cell.period
    if n_k is None:
        n_k = min(max(2 * L, 8), 64)
    elif n_k < 2 * L:
        raise ValueError(f"n_k={n_k} is below 2 L = {2 * L}")
    _check_contour(cell, omega)
    if sites is not None:
        sites = np.asarray(sites, dtype=int)
    n = n_k
    est = _block_mean(cell, omega, 2 * np.pi * np.arange(n) / n, sites)
    while n < max_nk:
        odd = 2 * np.pi * (np.arange(n) + 0.5) / n
        new = 0.5 * (est + _block_mean(cell, omega, odd, sites))
        n *= 2
        done = np.max(np.abs(new - est)) < tol
        est = new
        if done:
            break
    if return_nk:
        return est, n
    return est


def local_green(cell: UnitCellOperator, omega, site: int = 1, **kw) -> complex:
    """Diagonal element of the momentum-integrated resolvent at a 1-based site."""
    return pgf_momentum_integrated(cell, omega, sites=[site - 1], **kw)[0, 0]


def merge_poles(eigs, weights=None, rtol: float = 1e-12):
    """Sort poles and merge those closer than ``rtol * max|E|``, summing weights."""
    eigs = np.asarray(eigs, dtype=float).ravel()
    w = np.ones_like(eigs) if weights is None else np.asarray(weights, dtype=float).ravel()
    order = np.argsort(eigs, kind="stable")
    eigs, w = eigs[order], w[order]
    if eigs.size == 0:
        return eigs, w
    tol = rtol * max(1.0, float(np.max(np.abs(eigs))))
    keep = np.concatenate([[True], np.diff(eigs) > tol])
    groups = np.cumsum(keep) - 1
    we = np.bincount(groups, weights=w)
    # weighted mean keeps merged poles inside their cluster
    ee = np.bincount(groups, weights=w * eigs) / we
    return ee, we


def sampled_poles(cell: UnitCellOperator, n_theta: int = 256):
    """Bloch eigenvalues on ``theta_j = 2 pi j / n_theta`` as merged poles with weights.

    ``H_{-theta}`` is the complex conjugate of ``H_theta``, so only
    ``0 <= theta <= pi`` is diagonalised and interior phases count twice.
    """
    if n_theta % 2:
        raise ValueError("n_theta must be even")
    j = np.arange(n_theta // 2 + 1)
    th = 2 * np.pi * j / n_theta
    ev = np.linalg.eigvalsh(bloch_stack(cell, th))
    w = np.where((j == 0) | (j == n_theta // 2), 1.0, 2.0)
    ww = np.broadcast_to(w[:, None], ev.shape)
    return merge_poles(ev.ravel(), ww.ravel())


def averaged_pgf(eigs, omega: float, weights=None) -> float:
    """``(1/L) sum_xi w_xi / (omega - E_xi)`` with ``L = sum w``.

    Raises
    ------
    PoleError
        If ``omega`` is within ``1e-13`` of a pole.
    """
    eigs = np.asarray(eigs, dtype=float)
    w = np.ones_like(eigs) if weights is None else np.asarray(weights, dtype=float)
    d = omega - eigs
    k = int(np.argmin(np.abs(d)))
    if abs(d[k]) < AVG_POLE_TOL:
        raise PoleError(f"omega={omega!r} is a pole", eigs[k])
    return math.fsum(w / d) / math.fsum(w)


def _offset_sum(rel, w, s, wsum):
    return math.fsum(w / (rel + s)) / wsum


def find_gap_zero(eigs, gap, weights=None, *, full_output: bool = False, maxiter: int = 400):
    """Zero of :func:`averaged_pgf` between two consecutive poles.

    The sum is strictly decreasing between poles, from ``+inf`` to ``-inf``,
    so there is exactly one zero and plain bisection finds it. The iteration
    runs on the offset ``s = omega - E1`` so that distances to the two
    enclosing poles keep full relative precision.

    Parameters
    ----------
    eigs : array_like
        Real poles (need not be sorted).
    gap : (float, float)
        ``(E1, E2)``: two poles with none strictly in between.
    full_output : bool
        Also return the residual of the sum at the root.

    Raises
    ------
    ValueError
        If the bracket is not a pole-free interval with the expected signs.
    """
    eigs = np.asarray(eigs, dtype=float)
    w = np.ones_like(eigs) if weights is None else np.asarray(weights, dtype=float)
    E1, E2 = float(gap[0]), float(gap[1])
    if not E1 < E2:
        raise ValueError("gap must satisfy E1 < E2")
    if np.any((eigs > E1) & (eigs < E2)):
        raise ValueError("a pole lies strictly inside the gap")
    rel = E1 - eigs
    width = E2 - E1
    wsum = math.fsum(w)
    eta = width * 2.0 ** -40
    if not (_offset_sum(rel, w, eta, wsum) > 0 > _offset_sum(rel, w, width - eta, wsum)):
        raise ValueError("averaged pGF does not change sign across the gap")
    lo, hi = 0.0, width
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f = _offset_sum(rel, w, mid, wsum)
        if f == 0:
            lo = hi = mid
            break
        if f > 0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    omega = E1 + s
    if full_output:
        return omega, _offset_sum(rel, w, s, wsum)
    return omega


def _impurity_det(cell, strength, site, omega, tol):
    G0 = pgf_momentum_integrated(cell, omega, tol=tol)
    Vmat = np.zeros_like(G0)
    Vmat[site - 1, site - 1] = strength
    return float(np.real(np.linalg.det(G0 @ Vmat - np.eye(cell.period))))


def impurity_bound_states(cell: UnitCellOperator, strength: float, gap, n_k: int | None = None,
                          *, site: int = 1, n_scan: int = 64, xtol: float = 1e-13,
                          tol: float = 1e-12) -> list[float]:
    """Bound states of a single-site impurity inside a spectral gap.

    Roots of ``det[G0(omega) V - 1]`` in ``gap`` are bracketed on a uniform
    scan and refined by bisection. An infinite gap end is replaced by the
    band edge shifted by ``|strength| + 1``, beyond which no eigenvalue of the
    perturbed operator can lie.
    """
    if strength == 0:
        return []
    edges = band_edges(cell)
    lo, hi = float(gap[0]), float(gap[1])
    if math.isinf(lo):
        lo = edges[:, 0].min() - abs(strength) - 1.0
    if math.isinf(hi):
        hi = edges[:, 1].max() + abs(strength) + 1.0
    for a, b in edges:
        if a < hi and b > lo:
            raise ValueError(f"interval ({lo}, {hi}) overlaps band [{a}, {b}]")
    eta = 1e-7 * (hi - lo)
    grid = np.linspace(lo + eta, hi - eta, n_scan)
    f = lambda w: _impurity_det(cell, strength, site, w, tol)
    vals = [f(w) for w in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(float(a))
            continue
        if fa * fb > 0:
            continue
        while b - a > xtol * max(1.0, abs(a)):
            m = 0.5 * (a + b)
            fm = f(m)
            if fm == 0:
                a = b = m
                break
            if fa * fm < 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))
    return roots
