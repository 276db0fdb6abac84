"""Per-harmonic solves of the bordered strand-circuit systems.

Harmonics never couple, so the global block-diagonal system is never
formed: each ``A_k X_k = B_k`` is solved on its own (batched through the
kernel backend).  ``X_k`` holds the strand current phasors followed by the
common potential difference of the parallel strands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .assembly import PhaseSystem, harmonic_stack, HarmonicSystem
from .errors import InvalidParameterError, SingularSystemError
from .flux import FluxSpectrum
from .winding import AlphaW

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class HarmonicSolution:
    k: int
    strand_currents: np.ndarray
    delta_phi: complex
    I_bundle: complex


@dataclass(frozen=True)
class SolutionSet:
    """Strand currents ``currents[h, j]`` for harmonic ``harmonics[h]``, strand ``j``."""

    harmonics: np.ndarray
    currents: np.ndarray
    delta_phi: np.ndarray
    bundle: np.ndarray
    omega: float
    alpha: AlphaW

    @property
    def Nsh(self) -> int:
        return self.currents.shape[1]

    @property
    def N_h(self) -> int:
        return len(self.harmonics)

    def harmonic(self, k) -> HarmonicSolution:
        idx = np.nonzero(self.harmonics == k)[0]
        if not idx.size:
            raise KeyError(f"harmonic {k} not solved")
        h = idx[0]
        return HarmonicSolution(
            int(k), self.currents[h], complex(self.delta_phi[h]), complex(self.bundle[h])
        )

    def __iter__(self):
        return (self.harmonic(int(k)) for k in self.harmonics)

    def deviation(self) -> np.ndarray:
        """``I_j,k - I_bundle,k / Nsh`` for every harmonic and strand."""
        return self.currents - self.bundle[:, None] / self.Nsh


def solve_systems(A, B, orders, omega, alpha, max_condition=MAX_CONDITION) -> SolutionSet:
    """Solve a stack of bordered systems; raise on the first ill-conditioned one.

    With an all-ones border column, a constant added to the first ``Nsh``
    right-hand-side entries only shifts the last unknown.  That common mode
    is removed before the solve and restored afterwards, so a large common
    flux cannot swamp the strand-to-strand differences in roundoff.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    rhs = np.array(B, dtype=np.complex128)
    common = np.zeros(len(B), dtype=np.complex128)
    if A.shape[-1] > 1 and np.all(A[:, :-1, -1] == 1):
        common = np.mean(rhs[:, :-1], axis=1)
        rhs[:, :-1] -= common[:, None]
    X, cond = _kernels.solve_batched(A, rhs)
    X[:, -1] += common
    orders = np.asarray(orders, dtype=np.int64)
    bad = np.nonzero(~(cond <= max_condition))[0]
    if bad.size:
        h = bad[0]
        raise SingularSystemError(
            f"harmonic {orders[h]}: system matrix is singular or ill-conditioned "
            f"(condition estimate {cond[h]:.3g} > {max_condition:.3g})",
            harmonic=int(orders[h]),
            condition=float(cond[h]),
        )
    return SolutionSet(
        harmonics=orders,
        currents=X[:, :-1].copy(),
        delta_phi=X[:, -1].copy(),
        bundle=B[:, -1].copy(),
        omega=float(omega),
        alpha=AlphaW(alpha),
    )


def solve_harmonic(system: HarmonicSystem, max_condition=MAX_CONDITION) -> HarmonicSolution:
    sol = solve_systems(
        system.A_k[None], system.B_k[None], [system.k], system.omega, 1.0, max_condition
    )
    return sol.harmonic(system.k)


def solve_spectrum(
    phase: PhaseSystem, flux: FluxSpectrum, bundle, omega, regime="full"
) -> SolutionSet:
    """Solve every harmonic of ``flux`` with bundle currents ``bundle[h]``."""
    A, B = harmonic_stack(phase, flux.harmonics, omega, flux.phi, bundle, regime)
    try:
        return solve_systems(A, B, flux.harmonics, omega, phase.alpha)
    except SingularSystemError as exc:
        exc.alpha = float(phase.alpha)
        raise


def closed_form_inverse(Nsh, Z_act, alpha) -> np.ndarray:
    """Inverse of the bordered matrix for ``Z_A,k = alpha * Z_act * I``.

    The top-left block is ``P_k / alpha`` with
    ``P_k = (I - J / Nsh) / Z_act``; border entries are ``1 / Nsh`` and the
    corner is ``-alpha * Z_act / Nsh``.
    """
    Z_act = complex(Z_act)
    if Z_act == 0:
        raise ZeroDivisionError("strand impedance must be nonzero")
    alpha = float(AlphaW(alpha))
    n = int(Nsh)
    if n < 1:
        raise InvalidParameterError(f"Nsh must be >= 1, got {Nsh}")
    P = (np.eye(n) - np.full((n, n), 1.0 / n)) / Z_act
    inv = np.empty((n + 1, n + 1), dtype=np.complex128)
    inv[:n, :n] = P / alpha
    inv[:n, n] = 1.0 / n
    inv[n, :n] = 1.0 / n
    inv[n, n] = -alpha * Z_act / n
    return inv


@dataclass(frozen=True)
class CirculatingDecomposition:
    """``I_j,k = uniform[h] + delta[h, j] / alpha`` with ``sum_j delta[h, j] = 0``."""

    harmonics: np.ndarray
    uniform: np.ndarray
    delta: np.ndarray
    alpha: AlphaW
    regime: str


def decompose_currents(
    solution: SolutionSet, phase: PhaseSystem, flux: FluxSpectrum, regime="full"
) -> CirculatingDecomposition:
    """Split strand currents into the uniform share and the circulating part.

    ``diagonal`` evaluates the closed form from the mean-centred flux,
    ``-j k w (phi_j - mean(phi)) / Z_strd,act,k``, valid when the impedance
    matrix is ``alpha * Z_strd,act,k * I``.  ``full`` defines the circulating
    part from the solved currents, ``alpha * (I_j,k - I_bundle,k / Nsh)``.
    """
    alpha = float(solution.alpha)
    uniform = solution.bundle / solution.Nsh
    if regime == "diagonal":
        if not np.array_equal(flux.harmonics, solution.harmonics):
            raise InvalidParameterError("flux and solution cover different harmonics")
        omega = solution.omega
        delta = np.empty_like(solution.currents)
        for h, k in enumerate(solution.harmonics):
            centred = flux.phi[h] - np.mean(flux.phi[h])
            delta[h] = (-1j * k * omega / phase.strand_impedance_act(int(k), omega)) * centred
    elif regime == "full":
        delta = alpha * solution.deviation()
    else:
        raise InvalidParameterError(f"regime must be 'full' or 'diagonal', got {regime!r}")
    return CirculatingDecomposition(
        solution.harmonics.copy(), uniform, delta, AlphaW(alpha), regime
    )


@dataclass(frozen=True)
class Detection:
    """Outcome of the circulating-current test; truthy when they occur.

    ``strand`` and ``harmonic`` locate the largest deviation from the
    uniform share (strand 0-based), ``deviation`` is its magnitude [A].
    """

    occurs: bool
    strand: int
    harmonic: int
    deviation: float
    tolerance: float

    def __bool__(self):
        return self.occurs


def detect_circulating(solution: SolutionSet, tolerance: Optional[float] = None) -> Detection:
    """True iff some ``|I_j,k - I_bundle,k / Nsh|`` exceeds ``tolerance`` [A].

    Fourier coefficients are unique, so this matches the time-domain test
    ``exists j, t: I_j(t) != I_bundle(t) / Nsh``.  The default tolerance is
    ``1e-9`` times the largest current magnitude in the solution.
    """
    dev = np.abs(solution.deviation())
    if tolerance is None:
        scale = max(
            float(np.max(np.abs(solution.currents), initial=0.0)),
            float(np.max(np.abs(solution.bundle), initial=0.0)),
        )
        tolerance = 1e-9 * scale
    if dev.size == 0:
        return Detection(False, -1, -1, 0.0, float(tolerance))
    h, j = np.unravel_index(np.argmax(dev), dev.shape)
    worst = float(dev[h, j])
    return Detection(worst > tolerance, int(j), int(solution.harmonics[h]), worst, float(tolerance))
