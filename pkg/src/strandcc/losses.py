"""Strand RMS currents, bundle losses and their circulating-current split."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import AssemblyError, InvalidParameterError
from .solver import CirculatingDecomposition, SolutionSet
from .winding import AlphaW


@dataclass(frozen=True)
class LossReport:
    """Bundle losses [W] for one operating point.

    ``P_CC`` is the total with circulating currents, ``P_CC0`` the value for
    uniform current sharing, ``P_delta_CC = P_CC - P_CC0`` the excess and
    ``P_delta_CC_active`` the excess the active part alone would produce
    (``P_delta_CC * alpha**2``).  ``Y_residual`` is the cross term between
    uniform and circulating parts, zero up to roundoff.  The decomposition
    fields are ``None`` on a report from :func:`bundle_losses`.
    """

    R_strd: float
    P_CC: float
    per_strand: np.ndarray
    rms: np.ndarray
    P_CC0: Optional[float] = None
    P_delta_CC: Optional[float] = None
    P_delta_CC_active: Optional[float] = None
    Y_residual: Optional[float] = None

    @property
    def normalized(self) -> float:
        """``P_CC / P_CC0`` (NaN when there is no bundle current)."""
        if not self.P_CC0:
            return float("nan")
        return self.P_CC / self.P_CC0


def strand_rms(solution: SolutionSet, j: Optional[int] = None):
    """Parseval RMS ``sqrt(sum_k |I_j,k|^2)``; all strands when ``j`` is None."""
    sq = np.sum(np.abs(solution.currents) ** 2, axis=0)
    if j is None:
        return np.sqrt(sq)
    return float(np.sqrt(sq[j]))


def bundle_losses(solution: SolutionSet, R_strd) -> LossReport:
    if not R_strd > 0:
        raise InvalidParameterError(f"R_strd must be > 0, got {R_strd!r}")
    rms = strand_rms(solution)
    per_strand = R_strd * rms**2
    return LossReport(
        R_strd=float(R_strd), P_CC=float(np.sum(per_strand)), per_strand=per_strand, rms=rms
    )


def loss_decomposition(
    solution: SolutionSet, decomposition: CirculatingDecomposition, R_strd, alpha=None
) -> LossReport:
    """Full report: ``P_CC = P_CC0 + P_delta_CC_active / alpha**2`` (+ Y residual)."""
    alpha = float(AlphaW(solution.alpha if alpha is None else alpha))
    if decomposition.delta.shape != solution.currents.shape or not np.array_equal(
        decomposition.harmonics, solution.harmonics
    ):
        raise AssemblyError(
            f"decomposition {decomposition.delta.shape} does not match solution "
            f"{solution.currents.shape}"
        )
    base = bundle_losses(solution, R_strd)
    nsh = solution.Nsh
    uniform = solution.bundle / nsh
    P_CC0 = R_strd * nsh * float(np.sum(np.abs(uniform) ** 2))
    P_act = R_strd * float(np.sum(np.abs(decomposition.delta) ** 2))
    delta_sum = np.sum(decomposition.delta, axis=1)
    Y = 2.0 * R_strd * float(np.sum((uniform / alpha * np.conj(delta_sum)).real))
    return LossReport(
        R_strd=base.R_strd,
        P_CC=base.P_CC,
        per_strand=base.per_strand,
        rms=base.rms,
        P_CC0=P_CC0,
        P_delta_CC=base.P_CC - P_CC0,
        P_delta_CC_active=P_act,
        Y_residual=Y,
    )


@dataclass(frozen=True)
class Waveforms:
    """One period of strand currents ``strands[t, j]`` and the bundle sum [A]."""

    t: np.ndarray
    strands: np.ndarray
    bundle: np.ndarray

    @property
    def peak(self) -> np.ndarray:
        """Largest ``|I_j(t)|`` per strand over the sampled period."""
        return np.max(np.abs(self.strands), axis=0)


def min_samples(solution: SolutionSet) -> int:
    return 2 * int(np.max(solution.harmonics, initial=0)) + 1


def reconstruct_waveforms(solution: SolutionSet, omega=None, samples_per_period=None) -> Waveforms:
    """Sample ``I_j(t) = sqrt(2) sum_k Re(I_j,k exp(j k w t))`` over one period."""
    omega = solution.omega if omega is None else float(omega)
    if not omega > 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega!r}")
    need = min_samples(solution)
    n = 4 * need if samples_per_period is None else int(samples_per_period)
    if n < need:
        raise InvalidParameterError(
            f"samples_per_period={n} aliases harmonic {need // 2}; need at least {need}"
        )
    t = np.arange(n) * (2.0 * np.pi / omega / n)
    phase = omega * t
    strands = _kernels.reconstruct(solution.currents, solution.harmonics, phase)
    bundle = _kernels.reconstruct(solution.bundle[:, None], solution.harmonics, phase)[:, 0]
    return Waveforms(t, strands, bundle)


def time_domain_rms(waveforms: Waveforms) -> np.ndarray:
    """Mean-square over the uniformly sampled period, per strand."""
    return np.sqrt(np.mean(waveforms.strands**2, axis=0))
