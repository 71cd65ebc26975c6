"""
Test state diagnostics, the BTC detector and the steady-state checks
"""

import unittest

import numpy as np

from analysis.diagnostics import (
    BtcTolerances,
    btc_detect,
    btc_detect_values,
    finite_size_fit,
    ladder_commutator_expansion,
    ladder_commutator_norm,
    magnetization,
    pt_residual_matrix,
    purity,
    q_pt,
    q_pt_trend,
    steady_diag_asymmetry,
    steady_diag_pair,
    symmetry_delta,
)
from core.errors import DimensionMismatchError, InvalidParameterError
from core.lindblad import DensityMatrix, build_liouvillian, spectrum, stationary_state
from core.spin_algebra import ProductSpace, SpinSpace, build_spin_operators, parity_reflection, spin_state
from models import (
    DEPHASING_TRIPLE,
    ClassParams,
    GeneralizedParams,
    OneSpinBtcParams,
    OneSpinPtParams,
    general_one_spin_class,
    generalized_one_spin,
    one_spin_btc,
    one_spin_pt,
)


def btc_spectra(ratio, ladder):
    return [spectrum(build_liouvillian(one_spin_btc(OneSpinBtcParams(g=1.0, kappa=ratio, S=S))), with_modes=False)
            for S in ladder]


class TestStateDiagnostics(unittest.TestCase):
    """Test purity, Q_PT, magnetization and Δ"""

    def setUp(self):
        self.space = SpinSpace.from_spin(2)
        self.parity = parity_reflection(self.space)

    def test_purity(self):
        """Pure states have purity 1 and the mixed state 1/d"""
        pure = DensityMatrix.from_ket(self.space, spin_state(self.space, 1))
        self.assertAlmostEqual(purity(pure), 1.0)
        self.assertAlmostEqual(purity(DensityMatrix.maximally_mixed(self.space)), 0.2)

    def test_q_pt(self):
        """Q_PT vanishes on symmetric states and is positive otherwise"""
        mixed = DensityMatrix.maximally_mixed(self.space)
        self.assertAlmostEqual(q_pt(mixed, self.parity), 0.0, places=12)
        self.assertLess(float(np.max(pt_residual_matrix(mixed, self.parity))), 1e-12)

        up = DensityMatrix.from_ket(self.space, spin_state(self.space, 2))
        # P maps |2⟩⟨2| to |-2⟩⟨-2|: the distance is the full weight
        self.assertAlmostEqual(q_pt(up, self.parity), 1.0)

    def test_pt_residual_matrix_recomputation(self):
        """Entries are |ρ_ij - conj ρ_(d-1-i)(d-1-j)| and the PT image has the same residual"""
        rng = np.random.default_rng(7)
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        rho = DensityMatrix(self.space, a @ a.conj().T / np.trace(a @ a.conj().T))
        residual = pt_residual_matrix(rho, self.parity)

        d = self.space.dim
        expected = np.array([[abs(rho.data[i, j] - np.conj(rho.data[d - 1 - i, d - 1 - j])) for j in range(d)]
                             for i in range(d)])
        np.testing.assert_allclose(residual, expected, atol=1e-14)

        image = DensityMatrix(self.space, self.parity.data @ rho.data.conj() @ self.parity.data)
        np.testing.assert_allclose(pt_residual_matrix(image, self.parity), residual, atol=1e-14)
        np.testing.assert_allclose(residual, residual[::-1, ::-1], atol=1e-14)

    def test_pt_residual_matrix_regimes(self):
        """At S = 23 the κ-/gz = 0.5 steady state is closer to PT symmetric than at κ-/gz = 2"""
        def largest_entry(kappa_minus):
            model = generalized_one_spin(GeneralizedParams(gz=1.0, gx=3.0, pz=2, px=1,
                                                           kappa_minus=kappa_minus, kappa_plus=0.0, S=23))
            rho = stationary_state(build_liouvillian(model))
            return float(np.max(pt_residual_matrix(rho, model.parity)))

        self.assertLess(largest_entry(0.5), largest_entry(2.0))

    def test_magnetization(self):
        """⟨Sz⟩/S runs from 1 to -1"""
        self.assertAlmostEqual(magnetization(DensityMatrix.from_ket(self.space, spin_state(self.space, 2))), 1.0)
        self.assertAlmostEqual(magnetization(DensityMatrix.from_ket(self.space, spin_state(self.space, -1))), -0.5)

    def test_symmetry_delta(self):
        """A full and B empty gives Δ = 1; identical factors give Δ = 0"""
        product = ProductSpace(self.space)
        top, bottom = spin_state(self.space, 2), spin_state(self.space, -2)
        self.assertAlmostEqual(symmetry_delta(DensityMatrix.from_ket(product, np.kron(top, bottom))), 1.0)
        middle = spin_state(self.space, 0)
        self.assertAlmostEqual(symmetry_delta(DensityMatrix.from_ket(product, np.kron(middle, middle))), 0.0)
        with self.assertRaises(DimensionMismatchError):
            symmetry_delta(DensityMatrix.maximally_mixed(self.space))
        with self.assertRaises(DimensionMismatchError):
            magnetization(DensityMatrix.maximally_mixed(product))

    def test_q_pt_trend(self):
        """Strictly decreasing in S, in any input order"""
        self.assertTrue(q_pt_trend({8: 0.2, 4: 0.3, 12: 0.1}))
        self.assertFalse(q_pt_trend({4: 0.3, 8: 0.3, 12: 0.1}))

    def test_generalized_model_q_pt_trend(self):
        """gx/gz = 3: Q_PT falls with S at κ-/gz = 0.5 and is much larger at κ-/gz = 2"""
        def steady_q_pt(kappa_minus, S):
            model = generalized_one_spin(GeneralizedParams(gz=1.0, gx=3.0, pz=2, px=1,
                                                           kappa_minus=kappa_minus, kappa_plus=0.0, S=S))
            return q_pt(stationary_state(build_liouvillian(model)), model.parity)

        values = {S: steady_q_pt(0.5, S) for S in (4, 8, 12, 16, 20)}
        self.assertTrue(q_pt_trend(values), msg=str(values))
        self.assertGreaterEqual(steady_q_pt(2.0, 20), 5 * values[20])


class TestBtcDetection(unittest.TestCase):
    """Test the BTC verdict over an S-ladder"""

    def synthetic(self, rate):
        return {S: np.array([0, -rate(S) + 1j, -rate(S) - 1j, -rate(S) + 2j, -rate(S) - 2j, -5.0])
                for S in (4, 8, 16)}

    def test_synthetic_positive(self):
        """Decay rates ∝ 1/S with frequencies 1 and 2"""
        verdict = btc_detect_values(self.synthetic(lambda S: 1.0 / S))
        self.assertTrue(verdict.has_pure_imaginary_trend)
        self.assertAlmostEqual(verdict.base_frequency, 1.0)
        self.assertTrue(verdict.commensurable)
        self.assertTrue(verdict.positive)
        self.assertAlmostEqual(verdict.decay_exponent, -1.0)
        self.assertEqual(verdict.evidence[-1].candidates, (1.0, 2.0))

    def test_synthetic_negative(self):
        """Decay rates that do not shrink give no trend"""
        verdict = btc_detect_values(self.synthetic(lambda S: 0.5))
        self.assertFalse(verdict.has_pure_imaginary_trend)
        self.assertFalse(verdict.positive)

    def test_no_oscillating_modes(self):
        """Purely real spectra give a negative verdict without a base frequency"""
        verdict = btc_detect_values({S: np.array([0.0, -1.0 / S]) for S in (2, 4, 6)})
        self.assertFalse(verdict.positive)
        self.assertIsNone(verdict.base_frequency)

    def test_incommensurable_frequencies(self):
        """Frequencies 1 and √2 share no base"""
        spectra = {S: np.array([0, -1.0 / S + 1j, -1.0 / S + np.sqrt(2) * 1j]) for S in (4, 8, 16)}
        verdict = btc_detect_values(spectra)
        self.assertTrue(verdict.has_pure_imaginary_trend)
        self.assertFalse(verdict.commensurable)

    def test_multiples_of_base(self):
        """Frequencies 0.8k are commensurable with base 0.8"""
        frequencies = [0.8 * k for k in range(-3, 4) if k != 0]
        spectra = {S: np.array([0] + [-1.0 / S + 1j * f for f in frequencies]) for S in (4, 8, 16)}
        verdict = btc_detect_values(spectra)
        self.assertTrue(verdict.commensurable)
        self.assertAlmostEqual(verdict.base_frequency, 0.8)

    def test_one_spin_pt_verdicts(self):
        """p = 0 is positive with base g; p = 0.5 is negative on S ≤ 3"""
        def pt_spectra(p):
            return [spectrum(build_liouvillian(one_spin_pt(OneSpinPtParams(g=1.0, kappa=1.0, p=p, S=S))),
                             with_modes=False)
                    for S in (1, 2, 3)]

        symmetric = btc_detect(pt_spectra(0.0))
        self.assertTrue(symmetric.positive)
        self.assertAlmostEqual(symmetric.base_frequency, 1.0, places=8)
        self.assertAlmostEqual(symmetric.decay_exponent, -1.0, places=6)

        broken = btc_detect(pt_spectra(0.5))
        self.assertFalse(broken.positive)
        self.assertGreater(broken.decay_exponent, -BtcTolerances().min_decay_exponent)

    def test_ladder_validation(self):
        """At least three distinct S values are needed"""
        with self.assertRaises(InvalidParameterError):
            btc_detect_values({4: np.array([0j]), 8: np.array([0j])})
        spectra = btc_spectra(0.5, (2, 2, 3))
        with self.assertRaises(InvalidParameterError):
            btc_detect(spectra)

    def test_one_spin_btc_discrimination(self):
        """Positive at κ/g = 0.5 and negative at κ/g = 1.5"""
        tolerances = BtcTolerances()
        self.assertTrue(btc_detect(btc_spectra(0.5, (6, 12, 18)), tolerances).positive)
        self.assertFalse(btc_detect(btc_spectra(1.5, (6, 12, 18)), tolerances).positive)

    def test_dephasing_class_member(self):
        """H = g Sx with L = Sz oscillates at g with decay κ/2S"""
        spectra = [spectrum(build_liouvillian(general_one_spin_class(
            ClassParams(g=1.0, kappa=1.0, triples=(DEPHASING_TRIPLE,), S=S))), with_modes=False)
            for S in (2, 4, 8)]
        verdict = btc_detect(spectra)
        self.assertTrue(verdict.positive)
        self.assertLess(abs(verdict.base_frequency - 1.0), 0.05)
        for evidence in verdict.evidence:
            self.assertAlmostEqual(evidence.min_abs_re, 1.0 / (2 * evidence.S), places=8)


class TestFiniteSizeFit(unittest.TestCase):
    """Test the quadratic extrapolation in 1/S"""

    def test_exact_recovery(self):
        """Data on a + b/S + c/S² is fitted exactly"""
        points = [(S, 0.3 - 2.0 / S + 5.0 / S ** 2) for S in (4, 6, 8, 10)]
        fit = finite_size_fit(points)
        self.assertAlmostEqual(fit.a, 0.3, places=10)
        self.assertAlmostEqual(fit.b, -2.0, places=8)
        self.assertAlmostEqual(fit.c, 5.0, places=7)
        self.assertAlmostEqual(fit(5), 0.3 - 0.4 + 0.2, places=9)

    def test_needs_three_sizes(self):
        """Two distinct S values cannot fix three coefficients"""
        with self.assertRaises(InvalidParameterError):
            finite_size_fit([(4, 1.0), (4, 1.1), (8, 0.5)])


class TestSteadyStateChecks(unittest.TestCase):
    """Test the ladder-commutator and diagonal-asymmetry checks"""

    def test_commutator_norm_decreases(self):
        """κ/g = 0.5, n = n' = 2: the commutator shrinks with S"""
        norms = [ladder_commutator_norm(S, 0.5, 2, 2) for S in (10, 20, 40, 80)]
        self.assertTrue(all(b < a for a, b in zip(norms, norms[1:])), msg=str(norms))

    def test_expansion_matches_direct_commutator(self):
        """The two-sum expansion equals the commutator built from matrix powers"""
        for S, n, n_prime in ((3, 1, 1), (4, 2, 1), (5, 3, 2), (6, 2, 4)):
            space = SpinSpace.from_spin(S)
            ops = build_spin_operators(space)
            a = np.linalg.matrix_power(-0.7j * ops.splus.data / S, n)
            b = np.linalg.matrix_power(0.7j * ops.sminus.data / S, n_prime)
            expansion = ladder_commutator_expansion(S, 0.7, n, n_prime)
            np.testing.assert_allclose(expansion, a @ b - b @ a, atol=1e-12)
            self.assertAlmostEqual(np.linalg.norm(expansion), ladder_commutator_norm(S, 0.7, n, n_prime), places=12)

    def test_commutator_power_range(self):
        """Powers beyond 2S are refused"""
        with self.assertRaises(InvalidParameterError):
            ladder_commutator_norm(1, 0.5, 3, 1)

    def test_diagonal_asymmetry(self):
        """p = 0.5 at S = 50 favours -m over m"""
        left, right = steady_diag_asymmetry(50, 0.5)
        self.assertLess(left, right)
        self.assertLessEqual(left / right, 0.9)

    def test_diagonal_symmetry_below_threshold(self):
        """κ/g = 0.5 keeps ±m populations close"""
        left, right = steady_diag_pair(50, 0.5, 12)
        self.assertLess(abs(left - right) / right, 1e-2)

    def test_asymmetry_arguments(self):
        """p must lie in (0, 1) and S be an integer"""
        with self.assertRaises(InvalidParameterError):
            steady_diag_asymmetry(50, 0.0)
        with self.assertRaises(InvalidParameterError):
            steady_diag_asymmetry(7.5, 0.5)


if __name__ == '__main__':
    unittest.main()
