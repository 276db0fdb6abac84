"""End-to-end evaluation of a scenario and end-winding length sweeps.

A sweep keeps the active part (slot matrices, flux) fixed and changes only
``l_EW``.  Losses at every sweep point are evaluated with one loss
resistance, the full-coil strand resistance of the scenario's own geometry,
so ``P_CC0`` is common to all points and ``P_CC / P_CC0`` is the normalized
loss of the figure of merit.  Impedances do follow each point's ``alpha_w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assembly import PhaseSystem, assemble_phase
from .errors import InvalidParameterError, SingularSystemError
from .flux import FluxSpectrum, flux_spectrum
from .losses import LossReport, Waveforms, loss_decomposition, reconstruct_waveforms
from .scenario import Scenario
from .solver import CirculatingDecomposition, SolutionSet, decompose_currents, solve_spectrum
from .winding import AlphaW


@dataclass(frozen=True)
class Prepared:
    """Alpha-independent part of a scenario: active-part matrices and flux."""

    scenario: Scenario
    phase: PhaseSystem
    flux: FluxSpectrum


def prepare(scenario: Scenario) -> Prepared:
    phase = assemble_phase(scenario.winding)
    return Prepared(scenario, phase, flux_spectrum(scenario.field, scenario.winding,
                                                    scenario.orders))


@dataclass(frozen=True)
class OperatingPoint:
    alpha: AlphaW
    phase: PhaseSystem
    solution: SolutionSet
    decomposition: CirculatingDecomposition
    report: LossReport
    waveforms: Waveforms

    @property
    def max_current(self) -> float:
        """Largest instantaneous strand current magnitude over the period [A]."""
        return float(np.max(self.waveforms.peak))

    @property
    def max_rms(self) -> float:
        return float(np.max(self.report.rms))


def evaluate(
    prepared: Prepared,
    alpha=None,
    regime=None,
    samples=None,
    loss_resistance=None,
) -> OperatingPoint:
    """Solve one operating point; ``alpha`` defaults to the scenario geometry."""
    sc = prepared.scenario
    regime = sc.regime if regime is None else regime
    phase = prepared.phase if alpha is None else prepared.phase.with_alpha(alpha)
    solution = solve_spectrum(phase, prepared.flux, sc.bundle, sc.omega, regime)
    decomposition = decompose_currents(
        solution, phase, prepared.flux, regime="diagonal" if regime == "diagonal" else "full"
    )
    R = phase.R_strd if loss_resistance is None else loss_resistance
    report = loss_decomposition(solution, decomposition, R, phase.alpha)
    waves = reconstruct_waveforms(solution, sc.omega, samples)
    return OperatingPoint(phase.alpha, phase, solution, decomposition, report, waves)


def solve_scenario(scenario: Scenario, regime=None, samples=None) -> OperatingPoint:
    return evaluate(prepare(scenario), regime=regime, samples=samples)


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line ``P_CC = slope / alpha**2 + intercept``."""

    slope: float
    intercept: float
    r_squared: float


def fit_inverse_square(alphas, losses) -> Optional[LinearFit]:
    x = 1.0 / np.asarray(alphas, dtype=np.float64) ** 2
    y = np.asarray(losses, dtype=np.float64)
    if len(np.unique(x)) < 2:
        return None
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    scale = float(np.max(np.abs(y), initial=0.0))
    if ss_tot <= (1e-15 * scale) ** 2 * len(y):
        r2 = 1.0 if ss_res <= (1e-12 * max(scale, 1e-300)) ** 2 * len(y) else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), float(r2))


@dataclass(frozen=True)
class SweepPoint:
    alpha: AlphaW
    report: LossReport
    max_current: float
    max_rms: float
    max_deviation: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    fit: Optional[LinearFit]
    regime: str
    loss_resistance: float

    @property
    def alphas(self) -> np.ndarray:
        return np.array([float(p.alpha) for p in self.points])

    def column(self, name) -> np.ndarray:
        return np.array([getattr(p.report, name) for p in self.points], dtype=np.float64)


def run_sweep(
    scenario: Scenario,
    alphas: Sequence,
    regime=None,
    samples=None,
    prepared: Optional[Prepared] = None,
) -> SweepResult:
    """One full solve and loss report per ``alpha_w``, points sorted by ``alpha_w``."""
    if len(alphas) == 0:
        raise InvalidParameterError("alphas must be non-empty")
    alphas = sorted(AlphaW(a) for a in alphas)
    prepared = prepare(scenario) if prepared is None else prepared
    regime = scenario.regime if regime is None else regime
    R = prepared.phase.R_strd
    points = []
    for a in alphas:
        try:
            op = evaluate(prepared, alpha=a, regime=regime, samples=samples, loss_resistance=R)
        except SingularSystemError as exc:
            raise SingularSystemError(
                f"alpha_w={float(a):g}: {exc}", harmonic=exc.harmonic,
                condition=exc.condition, alpha=float(a),
            ) from exc
        dev = float(np.max(np.abs(op.solution.deviation()), initial=0.0))
        points.append(SweepPoint(a, op.report, op.max_current, op.max_rms, dev))
    fit = fit_inverse_square([float(p.alpha) for p in points], [p.report.P_CC for p in points])
    return SweepResult(tuple(points), fit, regime, float(R))


@dataclass(frozen=True)
class PropertyTolerances:
    """Pass thresholds for :func:`verify_property`.

    ``None`` selects the regime default: exact-regime sweeps are held to
    roundoff-level limits, full-model sweeps to engineering limits.
    """

    monotone_rtol: float = 1e-9
    lower_bound_rtol: float = 1e-12
    r_squared_min: Optional[float] = None
    intercept_rtol: Optional[float] = None

    def resolved(self, regime):
        exact = regime == "diagonal"
        r2 = self.r_squared_min if self.r_squared_min is not None else (
            1.0 - 1e-9 if exact else 0.99)
        ic = self.intercept_rtol if self.intercept_rtol is not None else (
            1e-9 if exact else 0.05)
        return r2, ic


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class Verdict:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def lines(self):
        out = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]
        out.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return out


def _nonincreasing(values, rtol):
    """Largest relative rise between consecutive values (<= 0 means monotone)."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) < 2:
        return 0.0
    scale = np.maximum(np.abs(values[:-1]), 1e-300)
    return float(np.max((values[1:] - values[:-1]) / scale)) - rtol


def verify_property(sweep: SweepResult, tolerances: PropertyTolerances = PropertyTolerances()):
    """Check the inverse-square law and its lower limit on a sweep.

    Checks: point count (>= 3), ``P_CC`` nonincreasing in ``alpha_w``,
    ``P_CC >= P_CC0`` everywhere, fit quality of ``P_CC`` against
    ``1 / alpha_w**2``, fit intercept against ``P_CC0``, and the largest
    strand current nonincreasing.  ``margin`` is positive when a check
    passes with room to spare.
    """
    r2_min, ic_rtol = tolerances.resolved(sweep.regime)
    checks = []
    n = len(sweep.points)
    checks.append(Check("point-count", n >= 3, float(n - 3), f"{n} sweep points (need >= 3)"))

    P = sweep.column("P_CC")
    P0 = sweep.column("P_CC0")
    rise = _nonincreasing(P, tolerances.monotone_rtol)
    checks.append(Check("monotone", rise <= 0, -rise,
                        f"largest relative rise of P_CC {rise + tolerances.monotone_rtol:.3e}"))

    floor = P - P0 * (1.0 - tolerances.lower_bound_rtol)
    worst = float(np.min(floor)) if n else 0.0
    checks.append(Check("lower-bound", worst >= 0, worst,
                        f"min(P_CC - P_CC0) = {float(np.min(P - P0)) if n else 0.0:.6e} W"))

    fit = sweep.fit
    if fit is None:
        checks.append(Check("fit-quality", False, float("-inf"), "fewer than 2 distinct alpha_w"))
        checks.append(Check("intercept", False, float("-inf"), "no fit"))
    else:
        checks.append(Check("fit-quality", fit.r_squared >= r2_min, fit.r_squared - r2_min,
                            f"R^2 = {fit.r_squared:.12f} (min {r2_min:.12g})"))
        ref = float(np.mean(P0))
        scale = ref if ref > 0 else max(float(np.max(np.abs(P))), 1e-300)
        rel = abs(fit.intercept - ref) / scale
        checks.append(Check("intercept", rel <= ic_rtol, ic_rtol - rel,
                            f"intercept {fit.intercept:.9e} W vs P_CC0 {ref:.9e} W "
                            f"(rel {rel:.3e}, tol {ic_rtol:.3g})"))

    peaks = np.array([p.max_current for p in sweep.points])
    rise_i = _nonincreasing(peaks, tolerances.monotone_rtol)
    checks.append(Check("max-current", rise_i <= 0, -rise_i,
                        "max strand current " + " -> ".join(f"{v:.6g}" for v in peaks) + " A"))
    return Verdict(tuple(checks))
