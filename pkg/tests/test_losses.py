import numpy as np
import pytest
from scipy.integrate import quad

from strandcc.errors import AssemblyError, InvalidParameterError
from strandcc.losses import (
    bundle_losses,
    loss_decomposition,
    min_samples,
    reconstruct_waveforms,
    strand_rms,
    time_domain_rms,
)
from strandcc.solver import CirculatingDecomposition, SolutionSet
from strandcc.sweep import evaluate, prepare

from conftest import make_scenario, random_field, random_winding

OMEGA = 2 * np.pi * 50


def solution(currents, harmonics=None, bundle=None, alpha=1.0, omega=OMEGA):
    currents = np.atleast_2d(np.asarray(currents, dtype=complex))
    n_h = currents.shape[0]
    harmonics = np.arange(1, n_h + 1) if harmonics is None else np.asarray(harmonics)
    bundle = currents.sum(axis=1) if bundle is None else np.asarray(bundle, dtype=complex)
    return SolutionSet(harmonics, currents, np.zeros(n_h, complex), bundle, omega, alpha)


def quad_rms(phasors, harmonics, omega):
    """RMS over one period by adaptive quadrature of the time signal."""
    T = 2 * np.pi / omega

    def sq(t):
        x = np.sqrt(2) * sum((c * np.exp(1j * k * omega * t)).real
                             for c, k in zip(phasors, harmonics))
        return x * x

    val, _ = quad(sq, 0.0, T, limit=400, epsabs=0.0, epsrel=1e-12)
    return np.sqrt(val / T)


class TestStrandRMS:
    def test_single_harmonic(self):
        assert strand_rms(solution([[3 + 4j]]), 0) == pytest.approx(5.0, rel=1e-15)

    def test_pythagorean(self):
        assert strand_rms(solution([[3.0], [4.0]]), 0) == pytest.approx(5.0, rel=1e-15)

    def test_matches_numeric_integration(self, rng):
        for _ in range(5):
            n_h = int(rng.integers(1, 8))
            harmonics = np.sort(rng.choice(np.arange(1, 20), size=n_h, replace=False))
            cur = rng.normal(size=(n_h, 3)) + 1j * rng.normal(size=(n_h, 3))
            sol = solution(cur, harmonics)
            rms = strand_rms(sol)
            for j in range(3):
                assert rms[j] == pytest.approx(quad_rms(cur[:, j], harmonics, OMEGA), rel=1e-6)

    def test_sampled_rms_agrees(self, rng):
        cur = rng.normal(size=(20, 4)) + 1j * rng.normal(size=(20, 4))
        sol = solution(cur)
        waves = reconstruct_waveforms(sol, samples_per_period=4 * 20 + 1)
        np.testing.assert_allclose(time_domain_rms(waves), strand_rms(sol), rtol=1e-10)


class TestBundleLosses:
    def test_equal_split(self):
        r = bundle_losses(solution([[1.0, 1.0]]), 1.0)
        assert r.P_CC == pytest.approx(2.0)
        np.testing.assert_allclose(r.per_strand, [1.0, 1.0])

    def test_all_in_one_strand(self):
        assert bundle_losses(solution([[2.0, 0.0]]), 1.0).P_CC == pytest.approx(4.0)

    def test_linear_in_resistance(self, rng):
        sol = solution(rng.normal(size=(3, 5)))
        a, b = bundle_losses(sol, 0.2), bundle_losses(sol, 0.6)
        assert b.P_CC == pytest.approx(3 * a.P_CC, rel=1e-14)
        assert a.P_CC == sum(a.per_strand)

    def test_resistance_positive(self):
        with pytest.raises(InvalidParameterError):
            bundle_losses(solution([[1.0]]), 0.0)


class TestDecomposition:
    def test_zero_flux(self, rng):
        desc = random_winding(rng, nsh=4, n_slots=2)
        field = random_field(rng, desc, (1, 5), scale=0.0)
        # unequal mutual coupling alone still unbalances strands in the full regime
        r = evaluate(prepare(make_scenario(desc, field, {1: 10.0, 5: 2.0}))).report
        assert r.P_delta_CC_active >= 0
        assert r.P_CC >= r.P_CC0 * (1 - 1e-12)
        op = evaluate(prepare(make_scenario(desc, field, {1: 10.0, 5: 2.0})), regime="diagonal")
        assert op.report.P_CC == pytest.approx(op.report.P_CC0, rel=1e-12)
        assert op.report.P_delta_CC_active == 0.0

    def test_diagonal_additivity(self, rng):
        for _ in range(10):
            desc = random_winding(rng, nsh=int(rng.integers(2, 8)), n_slots=2,
                                  l_EW=float(rng.uniform(0, 0.2)))
            field = random_field(rng, desc, (1, 3, 5))
            sc = make_scenario(desc, field, {1: 50.0, 3: 5j, 5: 1.0}, regime="diagonal")
            r = evaluate(prepare(sc)).report
            alpha = float(evaluate(prepare(sc)).alpha)
            assert r.P_CC == pytest.approx(r.P_CC0 + r.P_delta_CC_active / alpha**2, rel=1e-9)
            assert r.P_delta_CC == pytest.approx(r.P_delta_CC_active / alpha**2, rel=1e-9)
            assert abs(r.Y_residual) <= 1e-12 * r.P_CC

    def test_y_residual_full_regime(self, rng):
        for _ in range(10):
            desc = random_winding(rng, nsh=int(rng.integers(2, 8)), n_slots=3)
            field = random_field(rng, desc, (1, 7))
            r = evaluate(prepare(make_scenario(desc, field, {1: 20.0, 7: -3.0}))).report
            assert abs(r.Y_residual) <= 1e-12 * r.P_CC
            assert r.P_CC == pytest.approx(r.P_CC0 + r.P_delta_CC, rel=1e-9)
            assert r.P_CC >= r.P_CC0

    def test_uniform_share_formula(self):
        sol = solution([[1.0, 3.0]], bundle=[4.0])
        d = CirculatingDecomposition(sol.harmonics, sol.bundle / 2, np.array([[-1.0, 1.0]]),
                                     1.0, "full")
        r = loss_decomposition(sol, d, 2.0)
        assert r.P_CC0 == pytest.approx(2.0 * 2 * 4.0)
        assert r.P_CC == pytest.approx(2.0 * 10.0)
        assert r.normalized == pytest.approx(20.0 / 16.0)

    def test_dimension_mismatch(self):
        sol = solution([[1.0, 3.0]])
        d = CirculatingDecomposition(sol.harmonics, sol.bundle, np.zeros((1, 3)), 1.0, "full")
        with pytest.raises(AssemblyError):
            loss_decomposition(sol, d, 1.0)

    def test_normalized_without_bundle(self):
        sol = solution([[1.0, -1.0]])
        d = CirculatingDecomposition(sol.harmonics, np.zeros(1), np.array([[1.0, -1.0]]), 1.0,
                                     "full")
        assert np.isnan(loss_decomposition(sol, d, 1.0).normalized)


class TestWaveforms:
    def test_peak_at_zero(self):
        w = reconstruct_waveforms(solution([[1.0]]), samples_per_period=16)
        assert w.t[0] == 0.0
        assert w.strands[0, 0] == pytest.approx(np.sqrt(2), rel=1e-15)
        assert w.peak[0] == pytest.approx(np.sqrt(2), rel=1e-15)

    def test_sum_equals_bundle(self, rng, backend):
        cur = rng.normal(size=(7, 5)) + 1j * rng.normal(size=(7, 5))
        w = reconstruct_waveforms(solution(cur, harmonics=[1, 3, 5, 7, 9, 11, 13]))
        np.testing.assert_allclose(w.strands.sum(axis=1), w.bundle, atol=1e-9)

    def test_matches_direct_formula(self, rng):
        cur = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        ks = np.array([1, 5, 7])
        w = reconstruct_waveforms(solution(cur, ks), samples_per_period=60)
        t = w.t[:, None, None]
        ref = np.sqrt(2) * np.sum((cur[None] * np.exp(1j * ks[None, :, None] * OMEGA * t)).real,
                                  axis=1)
        np.testing.assert_allclose(w.strands, ref, atol=1e-12)
        assert w.t[-1] < 2 * np.pi / OMEGA

    def test_undersampling(self):
        sol = solution([[1.0], [1.0], [1.0]])
        assert min_samples(sol) == 7
        reconstruct_waveforms(sol, samples_per_period=7)
        with pytest.raises(InvalidParameterError):
            reconstruct_waveforms(sol, samples_per_period=6)
        with pytest.raises(InvalidParameterError):
            reconstruct_waveforms(sol, omega=0.0)

    def test_max_current_falls_with_alpha(self, case_full):
        prepared = prepare(case_full)
        peaks = [evaluate(prepared, alpha=a).max_current for a in (2.0, 2.5, 3.0)]
        assert peaks[0] > peaks[1] > peaks[2]
