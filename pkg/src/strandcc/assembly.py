"""Slot, phase and per-harmonic matrices of the strand circuit.

Slot matrices are evaluated over the active length.  The end winding enters
only as a diagonal self-impedance increment, so every strand's full
self-impedance is ``alpha_w`` times its active-part value and end windings
carry no mutual coupling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import AssemblyError, InvalidParameterError, SingularLayoutError
from .winding import AlphaW, SlotLayout, WindingDescription, alpha_w

MU_0 = 4e-7 * np.pi

REGIMES = ("full", "diagonal")


@dataclass(frozen=True)
class SlotMatrices:
    R: np.ndarray
    L: np.ndarray


def slot_resistance_matrix(layout: SlotLayout, sigma, S, l_cond) -> np.ndarray:
    """Diagonal matrix with ``l_cond / (sigma * S)`` on every diagonal entry."""
    for name, v in (("sigma", sigma), ("S", S), ("l_cond", l_cond)):
        if not v > 0:
            raise InvalidParameterError(f"{name} must be > 0, got {v!r}")
    return np.eye(layout.N_c) * (l_cond / (sigma * S))


def slot_inductance_matrix(layout: SlotLayout, l_cond) -> np.ndarray:
    """Per-slot inductance matrix of the conductors over length ``l_cond``.

    Self terms are ``-mu0 l / (8 pi)``; mutual terms are
    ``-(mu0 l / (4 pi)) * (ln(d^2 / r^2) + 1)``.  The common offset of this
    2-D potential convention cancels out of the strand currents.
    """
    if not l_cond > 0:
        raise InvalidParameterError(f"l_cond must be > 0, got {l_cond!r}")
    n = layout.N_c
    if n > 1:
        d = layout.distances()
        d[np.diag_indices(n)] = np.inf
        if np.min(d) == 0.0:
            i, j = np.unravel_index(np.argmin(d), d.shape)
            raise SingularLayoutError(
                f"slot {layout.slot_id}: conductors {i + 1} and {j + 1} coincide"
            )
    return _kernels.pair_inductance(
        np.ascontiguousarray(layout.positions), float(layout.r_strd), float(l_cond)
    )


def slot_matrices(desc: WindingDescription, l_cond=None) -> list:
    """R_i and L_i for every mapped slot, in the order of ``desc.maps``."""
    l_cond = desc.geometry.l_active if l_cond is None else l_cond
    out = []
    for m in desc.maps:
        layout = desc.layout_for(m.slot_id)
        R = slot_resistance_matrix(layout, desc.sigma, desc.strand_area(m.slot_id), l_cond)
        out.append(SlotMatrices(R, slot_inductance_matrix(layout, l_cond)))
    return out


@dataclass(frozen=True)
class PhaseSystem:
    """Active-part phase matrices plus the end-winding scaling.

    ``R_A`` and ``L_A`` cover the active length only.  ``R_strd_act`` and
    ``L_strd_act`` are the mean diagonal entries (one strand's active-part
    self terms); the full-coil values scale by ``alpha``.
    """

    R_A: np.ndarray
    L_A: np.ndarray
    alpha: AlphaW
    R_strd_act: float
    L_strd_act: float

    @property
    def Nsh(self) -> int:
        return self.R_A.shape[0]

    @property
    def R_strd(self) -> float:
        return float(self.alpha) * self.R_strd_act

    @property
    def L_strd(self) -> float:
        return float(self.alpha) * self.L_strd_act

    def with_alpha(self, alpha) -> "PhaseSystem":
        return replace(self, alpha=AlphaW(alpha))

    def strand_impedance_act(self, k, omega) -> complex:
        return complex(self.R_strd_act, k * omega * self.L_strd_act)

    def impedance(self, k, omega, regime="full") -> np.ndarray:
        """Full-coil impedance matrix ``Z_A,k`` for harmonic ``k``.

        ``full``: active-part ``R_A + j k w L_A`` plus ``(alpha - 1)`` times
        the strand's active self-impedance on the diagonal.
        ``diagonal``: mutual coupling dropped, ``alpha * Z_strd,act,k * I``.
        """
        _check_regime(regime)
        z_act = self.strand_impedance_act(k, omega)
        eye = np.eye(self.Nsh)
        if regime == "diagonal":
            return float(self.alpha) * z_act * eye
        return self.R_A + 1j * (k * omega) * self.L_A + (float(self.alpha) - 1.0) * z_act * eye


def _check_regime(regime):
    if regime not in REGIMES:
        raise InvalidParameterError(f"regime must be one of {REGIMES}, got {regime!r}")


def assemble_phase(
    desc: WindingDescription, slot_mats: Optional[Sequence[SlotMatrices]] = None
) -> PhaseSystem:
    """Sum ``M_i^T R_i M_i`` and ``M_i^T L_i M_i`` over the mapped slots."""
    if slot_mats is None:
        slot_mats = slot_matrices(desc)
    slot_mats = list(slot_mats)
    if len(slot_mats) != len(desc.maps):
        raise AssemblyError(f"{len(slot_mats)} slot matrices for {len(desc.maps)} maps")
    if not desc.maps:
        raise AssemblyError("winding has no slot maps")
    n_c = desc.maps[0].shape[0]
    strand_of = np.empty((len(desc.maps), n_c), dtype=np.int64)
    sign = np.empty((len(desc.maps), n_c))
    R = np.empty((len(desc.maps), n_c, n_c))
    L = np.empty_like(R)
    for i, (m, sm) in enumerate(zip(desc.maps, slot_mats)):
        rows, cols = m.shape
        if rows != n_c or cols != desc.Nsh:
            raise AssemblyError(
                f"slot {m.slot_id}: map is {rows}x{cols}, expected {n_c}x{desc.Nsh}"
            )
        if sm.R.shape != (rows, rows) or sm.L.shape != (rows, rows):
            raise AssemblyError(
                f"slot {m.slot_id}: matrices {sm.R.shape}/{sm.L.shape} do not match "
                f"{rows} conductors"
            )
        if np.any(np.count_nonzero(m.entries, axis=1) > 1):
            raise AssemblyError(f"slot {m.slot_id}: a conductor is linked to several strands")
        strand_of[i], sign[i] = m.row_form()
        R[i] = sm.R
        L[i] = sm.L
    R_A = _kernels.congruence_sum(strand_of, sign, R, desc.Nsh)
    L_A = _kernels.congruence_sum(strand_of, sign, L, desc.Nsh)
    # summation order differs between the triangles; restore exact symmetry
    R_A = 0.5 * (R_A + R_A.T)
    L_A = 0.5 * (L_A + L_A.T)
    return PhaseSystem(
        R_A=R_A,
        L_A=L_A,
        alpha=alpha_w(desc.geometry),
        R_strd_act=float(np.mean(np.diag(R_A))),
        L_strd_act=float(np.mean(np.diag(L_A))),
    )


def strand_impedance(R_strd, L_strd, k, omega, alpha):
    """Return ``(Z_strd,k, Z_strd,act,k)`` for full-coil ``R_strd``, ``L_strd``."""
    if k < 1:
        raise InvalidParameterError(f"harmonic order must be >= 1, got {k}")
    if not omega > 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    z = complex(R_strd, k * omega * L_strd)
    return z, z / float(AlphaW(alpha))


def bordered_matrix(Z) -> np.ndarray:
    """``[[Z, 1], [1^T, 0]]`` for an ``Nsh x Nsh`` impedance matrix."""
    Z = np.asarray(Z)
    n = Z.shape[0]
    if Z.shape != (n, n):
        raise AssemblyError(f"impedance matrix must be square, got {Z.shape}")
    A = np.zeros((n + 1, n + 1), dtype=np.complex128)
    A[:n, :n] = Z
    A[:n, n] = 1.0
    A[n, :n] = 1.0
    return A


def rhs_vector(k, omega, phi, I_bundle) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.complex128)
    return np.concatenate([-1j * (k * omega) * phi, [complex(I_bundle)]])


@dataclass(frozen=True)
class HarmonicSystem:
    k: int
    omega: float
    Z_A_k: np.ndarray
    A_k: np.ndarray
    B_k: np.ndarray

    @property
    def Nsh(self) -> int:
        return self.Z_A_k.shape[0]

    @property
    def I_bundle(self) -> complex:
        return complex(self.B_k[-1])


def build_harmonic_system(phase: PhaseSystem, k, omega, phi, I_bundle, regime="full"):
    phi = np.asarray(phi)
    if phi.shape != (phase.Nsh,):
        raise AssemblyError(f"flux vector has shape {phi.shape}, expected ({phase.Nsh},)")
    Z = phase.impedance(k, omega, regime)
    return HarmonicSystem(k, omega, Z, bordered_matrix(Z), rhs_vector(k, omega, phi, I_bundle))


def harmonic_stack(phase: PhaseSystem, orders, omega, phi, bundle, regime="full"):
    """Stacked ``(A_k, B_k)`` for all harmonics, shapes (N_h, n+1, n+1) and (N_h, n+1)."""
    orders = np.asarray(orders)
    phi = np.asarray(phi)
    bundle = np.asarray(bundle)
    n = phase.Nsh
    if phi.shape != (len(orders), n) or bundle.shape != (len(orders),):
        raise AssemblyError(
            f"flux {phi.shape} / bundle {bundle.shape} inconsistent with "
            f"{len(orders)} harmonics and {n} strands"
        )
    A = np.empty((len(orders), n + 1, n + 1), dtype=np.complex128)
    B = np.empty((len(orders), n + 1), dtype=np.complex128)
    for h, k in enumerate(orders):
        A[h] = bordered_matrix(phase.impedance(int(k), omega, regime))
        B[h] = rhs_vector(int(k), omega, phi[h], bundle[h])
    return A, B
