"""Reduced 2x2 transfer matrices built from projected Green's function elements.

Because the inter-cell hopping is rank one, ``J = V D W^H`` with ``V`` and
``W`` selecting the first and last site of the cell. Projecting
``psi_n = G (J psi_{n+1} + J^H psi_{n-1})`` onto those two sites leaves a
2x2 recursion on the boundary amplitudes, whose matrix only needs the four
numbers ``V^H G V``, ``V^H G W``, ``W^H G V`` and ``W^H G W``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .models import UnitCellOperator

__all__ = [
    "EnergyClass",
    "ReducedSVD",
    "TransferMatrix2x2",
    "PropagationBlocked",
    "reduced_svd",
    "reduced_tm",
    "classify_energy",
    "full_tme",
    "transfer_matrix_at",
    "TAU_DEF",
    "TAU_CLS",
]

TAU_DEF = 1e-10
TAU_CLS = 1e-8


class EnergyClass(str, enum.Enum):
    IN_SPECTRUM = "in_spectrum"
    GAP = "gap"
    DEFICIENT = "deficient"


class PropagationBlocked(ArithmeticError):
    """``W^H G V`` vanishes, so the boundary data cannot be propagated."""


@dataclass(frozen=True)
class ReducedSVD:
    V: np.ndarray
    W: np.ndarray
    D: float

    def reconstruct(self) -> np.ndarray:
        return self.D * np.outer(self.V, self.W.conj())


@dataclass(frozen=True)
class TransferMatrix2x2:
    entries: np.ndarray
    classification: EnergyClass

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.entries)


def reduced_svd(J: np.ndarray) -> ReducedSVD:
    """Rank-one factorisation of a single-corner hopping matrix.

    ``V = (-1)^L e_1`` and ``W = s (-1)^L e_L`` where ``s`` is the phase of the
    corner entry, so that ``D = |J[0, L-1]|`` is non-negative.

    Raises
    ------
    ValueError
        If ``J`` has any entry other than ``J[0, L-1]``, or that entry is zero.
    """
    J = np.asarray(J)
    L = J.shape[0]
    c = J[0, L - 1]
    rest = J.copy()
    rest[0, L - 1] = 0
    if np.any(rest != 0) or c == 0:
        raise ValueError("hopping matrix is not rank one with a single corner entry")
    sign = (-1.0) ** L
    D = float(abs(c))
    phase = c / D
    V = np.zeros(L, dtype=np.result_type(J, float))
    W = np.zeros(L, dtype=np.result_type(J, float))
    V[0] = sign
    W[L - 1] = sign * np.conj(phase)
    return ReducedSVD(V, W, D)


def _deficient(g_vv, g_ww, scale, tau):
    return abs(g_ww) <= tau * scale or abs(g_vv) <= tau * scale


def reduced_tm(g_vv, g_vw, g_wv, g_ww, t: float = 1.0, *, tau_def: float = TAU_DEF,
               tau_cls: float = TAU_CLS) -> TransferMatrix2x2:
    """The 2x2 transfer matrix acting on ``(W^H psi_n, V^H psi_{n-1})``.

    ``T = (t g_wv)^-1 [[1, -t g_ww], [t g_vv, t^2 (g_vw g_wv - g_vv g_ww)]]``,
    which is the usual factored form at ``t = 1``.

    Raises
    ------
    PropagationBlocked
        When ``g_wv`` is zero relative to the other elements.
    """
    scale = max(abs(g_vv), abs(g_vw), abs(g_wv), abs(g_ww))
    if scale == 0 or abs(g_wv) <= tau_def * scale:
        raise PropagationBlocked("W^H G V vanishes")
    pref = 1.0 / (t * g_wv)
    T = pref * np.array([[1.0, -t * g_ww],
                         [t * g_vv, t * t * (g_vw * g_wv - g_vv * g_ww)]])
    if _deficient(g_vv, g_ww, scale, tau_def):
        cls = EnergyClass.DEFICIENT
    else:
        cls = _classify_entries(T, tau_cls)
    return TransferMatrix2x2(T, cls)


def _classify_entries(T, tau_cls):
    lam = np.abs(np.linalg.eigvals(T))
    if np.all(np.abs(lam - 1.0) < tau_cls):
        return EnergyClass.IN_SPECTRUM
    return EnergyClass.GAP


def classify_energy(T: TransferMatrix2x2, tau_cls: float = TAU_CLS) -> EnergyClass:
    """``IN_SPECTRUM`` when both eigenvalues have unit modulus, else ``GAP``."""
    if T.classification == EnergyClass.DEFICIENT:
        return EnergyClass.DEFICIENT
    return _classify_entries(T.entries, tau_cls)


def full_tme(cell: UnitCellOperator, E: float) -> np.ndarray:
    """``[[J^-1 (E - M), -J^-1 J^H], [1, 0]]``; only defined when ``J`` is invertible (L = 1)."""
    if cell.period != 1:
        raise NotImplementedError("J is singular for cells longer than one site")
    j = cell.J[0, 0]
    m = cell.M[0, 0]
    return np.array([[(E - m) / j, -np.conj(j) / j], [1.0, 0.0]])


def transfer_matrix_at(cell: UnitCellOperator, omega, **kw) -> TransferMatrix2x2:
    """Reduced transfer matrix of ``cell`` at energy ``omega``.

    For a one-site cell at the on-site energy the Green's function has a
    pole but the reduced matrix has a finite limit, equal to :func:`full_tme`.
    """
    from .greens import PoleError, pgf_intracell

    try:
        s = pgf_intracell(cell, omega)
    except PoleError:
        if cell.period != 1:
            raise
        T = full_tme(cell, omega)
        return TransferMatrix2x2(T, _classify_entries(T, kw.get("tau_cls", TAU_CLS)))
    return reduced_tm(s.g_vv, s.g_vw, s.g_wv, s.g_ww, reduced_svd(cell.J).D, **kw)
