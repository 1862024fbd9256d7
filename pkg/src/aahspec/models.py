"""Unit-cell operators for rational approximants of the almost-Mathieu chain.

A periodic nearest-neighbour chain with cell length ``L`` is stored as an
intra-cell matrix ``M`` (``L x L``, Hermitian) and an inter-cell hopping ``J``
whose only entry sits at ``(0, L-1)``. With that convention the eigenvalue
problem on cell ``n`` reads ``J psi_{n+1} + M psi_n + J^H psi_{n-1} = E psi_n``
and the Bloch fibre at boundary phase ``theta`` is
``M + J e^{i theta} + J^H e^{-i theta}``.

Sites are numbered ``x = 1..L`` inside a cell; array index ``x - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rational import Convergent

__all__ = [
    "AAH",
    "CHIRAL",
    "ModelParams",
    "UnitCellOperator",
    "build_aah_cell",
    "build_chiral_cell",
    "build_cell",
    "chain_cell",
    "bloch_matrix",
    "bloch_stack",
    "add_impurity",
    "chiral_bonds",
    "chiral_period",
    "open_chain",
]

AAH = "aah"
CHIRAL = "chiral"


@dataclass(frozen=True)
class ModelParams:
    """Couplings and flux ``p/q`` of one rational approximant.

    ``delta`` is the potential phase for the AAH variant and the bond phase
    ``delta_y`` for the chiral variant. Fluxes ``0 <= p <= q`` are accepted so
    that both ends of the unit interval (``0/1`` and ``1/1``) are available.
    """

    p: int
    q: int
    V: float = 1.0
    t: float = 1.0
    delta: float = 0.0
    variant: str = AAH

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("flux denominator must be >= 1")
        if not 0 <= self.p <= self.q:
            raise ValueError("flux numerator must satisfy 0 <= p <= q")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"flux {self.p}/{self.q} is not reduced")
        if self.variant not in (AAH, CHIRAL):
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def from_flux(cls, flux, **kw) -> "ModelParams":
        if isinstance(flux, Convergent):
            return cls(flux.p, flux.q, **kw)
        if isinstance(flux, tuple):
            return cls(int(flux[0]), int(flux[1]), **kw)
        f = Fraction(flux)
        return cls(f.numerator, f.denominator, **kw)

    @property
    def flux(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def is_critical(self) -> bool:
        return self.V == self.t

    def replace(self, **kw) -> "ModelParams":
        d = dict(p=self.p, q=self.q, V=self.V, t=self.t, delta=self.delta, variant=self.variant)
        d.update(kw)
        return ModelParams(**d)


@dataclass(frozen=True)
class UnitCellOperator:
    """Intra-cell matrix ``M`` and rank-one inter-cell hopping ``J``.

    ``period`` is the cell length (``q`` for AAH cells, ``q`` or ``2q`` for
    chiral cells). ``params`` records how the cell was built, when known.
    """

    M: np.ndarray
    J: np.ndarray
    params: ModelParams | None = field(default=None, compare=False)

    def __post_init__(self):
        M = np.array(self.M, dtype=float if np.isrealobj(self.M) else complex)
        J = np.array(self.J, dtype=M.dtype if np.isrealobj(self.J) else complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or J.shape != M.shape:
            raise ValueError("M and J must be square matrices of equal size")
        if not np.array_equal(M, M.conj().T):
            raise ValueError("M must be exactly Hermitian")
        M.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "J", J)

    @property
    def period(self) -> int:
        return self.M.shape[0]

    @property
    def q(self) -> int:
        return self.period

    @property
    def corner(self):
        """The single inter-cell bond amplitude ``J[0, L-1]``."""
        return self.J[0, -1]

    def bonds(self) -> np.ndarray:
        """Bond amplitudes ``x -> x+1`` for ``x = 1..L``; the last is inter-cell."""
        L = self.period
        inner = np.array([self.M[i, i + 1] for i in range(L - 1)], dtype=self.M.dtype)
        return np.concatenate([inner, [self.corner]])


def chain_cell(diag, bonds, params: ModelParams | None = None) -> UnitCellOperator:
    """Cell from on-site energies and the ``L`` bonds ``x -> x+1`` (last one inter-cell)."""
    diag = np.asarray(diag)
    bonds = np.asarray(bonds)
    L = diag.shape[0]
    if bonds.shape != (L,):
        raise ValueError("need exactly one bond per site")
    dtype = np.result_type(diag, bonds, float)
    M = np.diag(diag.astype(dtype))
    if L > 1:
        idx = np.arange(L - 1)
        M[idx, idx + 1] = bonds[:-1]
        M[idx + 1, idx] = np.conj(bonds[:-1])
    J = np.zeros((L, L), dtype=dtype)
    J[0, L - 1] = bonds[-1]
    return UnitCellOperator(M, J, params)


def build_aah_cell(params: ModelParams) -> UnitCellOperator:
    """Cell of ``t`` hopping plus potential ``2 V cos(2 pi p/q x + delta)``, ``x = 1..q``."""
    if params.variant != AAH:
        raise ValueError("build_aah_cell needs variant='aah'")
    x = np.arange(1, params.q + 1)
    diag = 2.0 * params.V * np.cos(2.0 * np.pi * params.p / params.q * x + params.delta)
    return chain_cell(diag, np.full(params.q, params.t, dtype=float), params)


def chiral_period(p: int, q: int) -> int:
    """True period of ``sin(pi p/q x + d)``: ``2q`` for odd ``p``, else ``q``."""
    return 2 * q if p % 2 else q


def chiral_bonds(p_over_q, x, delta_y: float) -> np.ndarray:
    """``2 sin(pi a x + delta_y)`` for rational or real ``a``."""
    return 2.0 * np.sin(np.pi * float(p_over_q) * np.asarray(x, dtype=float) + delta_y)


def build_chiral_cell(params: ModelParams) -> UnitCellOperator:
    """Zero-diagonal chain with bond ``x -> x+1`` equal to ``2 sin(pi p/q x + delta_y)``.

    The cell spans one true period of the bond pattern, see :func:`chiral_period`.
    ``V`` and ``t`` are not used; the model is defined at criticality.
    """
    if params.variant != CHIRAL:
        raise ValueError("build_chiral_cell needs variant='chiral'")
    L = chiral_period(params.p, params.q)
    x = np.arange(1, L + 1)
    b = chiral_bonds(Fraction(params.p, params.q), x, params.delta)
    return chain_cell(np.zeros(L), b, params)


def build_cell(params: ModelParams) -> UnitCellOperator:
    if params.variant == CHIRAL:
        return build_chiral_cell(params)
    return build_aah_cell(params)


def bloch_matrix(cell: UnitCellOperator, theta: float) -> np.ndarray:
    """``M + J e^{i theta} + J^H e^{-i theta}``."""
    ph = np.exp(1j * theta)
    return cell.M + cell.J * ph + cell.J.conj().T * np.conj(ph)


def bloch_stack(cell: UnitCellOperator, thetas) -> np.ndarray:
    """Bloch matrices for many phases, shape ``(len(thetas), L, L)``."""
    ph = np.exp(1j * np.asarray(thetas, dtype=float))[:, None, None]
    return cell.M[None] + cell.J[None] * ph + cell.J.conj().T[None] * np.conj(ph)


def add_impurity(cell: UnitCellOperator, site: int, strength: float) -> UnitCellOperator:
    """Add ``strength`` to the on-site energy of ``site`` (1-based)."""
    if not 1 <= site <= cell.period:
        raise IndexError(f"site {site} outside 1..{cell.period}")
    M = np.array(cell.M, dtype=np.result_type(cell.M, float))
    M[site - 1, site - 1] += strength
    return UnitCellOperator(M, cell.J, cell.params)


def open_chain(cell: UnitCellOperator, n_cells: int) -> np.ndarray:
    """Dense Hamiltonian of ``n_cells`` cells with open ends.

    Cell ``n`` occupies rows ``n L .. (n+1) L - 1`` and couples to cell
    ``n+1`` through ``J``; sites therefore run ``x = 1..L`` inside each cell
    and cell ``n`` sits geometrically to the right of cell ``n+1``.
    """
    L = cell.period
    H = np.zeros((n_cells * L, n_cells * L), dtype=np.result_type(cell.M, cell.J))
    for n in range(n_cells):
        s = slice(n * L, (n + 1) * L)
        H[s, s] = cell.M
        if n + 1 < n_cells:
            s1 = slice((n + 1) * L, (n + 2) * L)
            H[s, s1] = cell.J
            H[s1, s] = cell.J.conj().T
    return H
