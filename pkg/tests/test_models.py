"""
Test model families, their closed forms and PT properties
"""

import dataclasses
import unittest

import numpy as np

from analysis.diagnostics import symmetry_delta
from core.errors import CapExceededError, ConfigError, ExceptionalPointError, InvalidParameterError
from core.lindblad import (
    DensityMatrix,
    build_liouvillian,
    check_liouvillian_pt,
    evolve,
    expectation,
    is_pt_symmetric,
    stationary_state,
    vec,
)
from core.spin_algebra import OperatorMatrix, SpinSpace, build_spin_operators, spin_state
from models import (
    BTC_TRIPLE,
    DEPHASING_TRIPLE,
    FAMILIES,
    ClassParams,
    GeneralizedParams,
    OneSpinBtcParams,
    OneSpinPtParams,
    TwoSpinParams,
    from_model_dissipators,
    gain_loss_weights,
    general_one_spin_class,
    generalized_one_spin,
    get_family,
    is_balanced,
    one_spin_btc,
    one_spin_btc_exact_steady,
    one_spin_pt,
    one_spin_pt_exact_spectrum,
    pt_partner,
    two_spin_infinite_S,
    two_spin_pt,
    x_lowering_mode,
)
from models.dissipator_class import class_jump


class TestRegistry(unittest.TestCase):
    """Test the model family registry"""

    def test_all_families_registered(self):
        """Every model id resolves to a family"""
        self.assertEqual(set(FAMILIES), {'one-spin-btc', 'generalized', 'one-spin-pt', 'class', 'two-spin'})
        for name in FAMILIES:
            family = get_family(name)
            self.assertEqual(family.name, name)
            self.assertIn('S', family.parameter_names)

    def test_unknown_model(self):
        """Unknown ids raise ConfigError"""
        with self.assertRaises(ConfigError):
            get_family('three-spin')

    def test_make_params_rejects_foreign_keys(self):
        """Parameters of another family are refused"""
        family = get_family('one-spin-btc')
        with self.assertRaises(ConfigError):
            family.make_params({'g': 1.0, 'p': 0.5, 'S': 1})
        model = family.build_from({'g': 1.0, 'kappa': 0.5, 'S': 2})
        self.assertEqual(model.dim, 5)
        self.assertIs(family.get_last_model(), model)

    def test_build_checks_parameter_type(self):
        """A family only builds its own parameter record"""
        with self.assertRaises(InvalidParameterError):
            get_family('one-spin-btc').build(OneSpinPtParams())


class TestOneSpinModels(unittest.TestCase):
    """Test the one-spin BTC, PT and generalized models"""

    def test_btc_exact_steady_equals_null_space(self):
        """Closed-form steady state matches the null-space solve"""
        for S in range(1, 11):
            for ratio in (0.3, 0.8, 1.5):
                params = OneSpinBtcParams(g=1.0, kappa=ratio, S=S)
                numerical = stationary_state(build_liouvillian(one_spin_btc(params)))
                exact = one_spin_btc_exact_steady(params)
                self.assertLess(exact.trace_distance(numerical), 1e-8, msg=f'S={S} kappa/g={ratio}')

    def test_btc_exact_steady_needs_drive(self):
        """g = 0 has no closed form"""
        with self.assertRaises(InvalidParameterError):
            one_spin_btc_exact_steady(OneSpinBtcParams(g=0.0, kappa=1.0, S=1))

    def test_parameter_validation(self):
        """Negative rates, |p| > 1 and bad powers are rejected"""
        with self.assertRaises(InvalidParameterError):
            OneSpinBtcParams(kappa=-1.0)
        with self.assertRaises(InvalidParameterError):
            OneSpinPtParams(p=1.5)
        with self.assertRaises(InvalidParameterError):
            OneSpinPtParams(parity='mirror')
        with self.assertRaises(InvalidParameterError):
            GeneralizedParams(pz=1.5)
        with self.assertRaises(InvalidParameterError):
            OneSpinBtcParams(S=0.7).space

    def test_exact_spectrum_count_and_p(self):
        """(2S+1)² labelled eigenvalues at p = 0 and none otherwise"""
        values = one_spin_pt_exact_spectrum(OneSpinPtParams(S=2))
        self.assertEqual(len(values), 25)
        self.assertEqual(sum(1 for v in values if v.value == 0), 1)
        with self.assertRaises(InvalidParameterError):
            one_spin_pt_exact_spectrum(OneSpinPtParams(p=0.2, S=2))

    def test_x_lowering_modes(self):
        """(Sx-)^q is an eigenmode with eigenvalue q(ig - 2κ/S) at p = 0"""
        g, kappa = 1.0, 0.7
        for S in (1, 2, 3):
            params = OneSpinPtParams(g=g, kappa=kappa, p=0.0, S=S)
            matrix = build_liouvillian(one_spin_pt(params)).matrix
            for q in range(2 * S + 1):
                mode = vec(x_lowering_mode(params.space, q))
                expected = q * (1j * g - 2 * kappa / S) * mode
                np.testing.assert_allclose(matrix @ mode, expected, atol=1e-10 * max(1.0, np.linalg.norm(mode)),
                                           err_msg=f'S={S} q={q}')

    def test_generalized_rates(self):
        """Only the non-zero collective rates appear as dissipators"""
        model = generalized_one_spin(GeneralizedParams(kappa_minus=0.5, kappa_plus=0.0, S=2))
        self.assertEqual(len(model.dissipators), 1)
        self.assertAlmostEqual(model.dissipators[0][0], 0.25)


class TestPtResiduals(unittest.TestCase):
    """Test the Liouvillian PT residual across families"""

    def test_symmetric_models(self):
        """BTC, p = 0, even pz and balanced two-spin are PT symmetric"""
        models = [
            one_spin_btc(OneSpinBtcParams(g=0.7, kappa=1.3, S=3)),
            one_spin_pt(OneSpinPtParams(g=1.0, kappa=0.4, p=0.0, S=2)),
            generalized_one_spin(GeneralizedParams(gz=1.0, gx=3.0, pz=2, px=1, kappa_minus=0.5, S=3)),
            two_spin_pt(TwoSpinParams(g=1.0, gamma_gain=0.6, gamma_loss=0.6, S=1)),
        ]
        for model in models:
            self.assertLessEqual(check_liouvillian_pt(model), 1e-12, msg=model.label)
            self.assertTrue(is_pt_symmetric(model))

    def test_broken_models(self):
        """p = 0.5, pz = 3 and Γg = 2Γl break the symmetry"""
        models = [
            one_spin_pt(OneSpinPtParams(g=1.0, kappa=1.0, p=0.5, S=2)),
            generalized_one_spin(GeneralizedParams(gz=1.0, gx=1.0, pz=3, px=1, kappa_minus=0.5, S=3)),
            two_spin_pt(TwoSpinParams(g=1.0, gamma_gain=2.0, gamma_loss=1.0, S=1)),
        ]
        for model in models:
            self.assertGreaterEqual(check_liouvillian_pt(model), 1e-3, msg=model.label)
            self.assertFalse(is_pt_symmetric(model))

    def test_residual_ignores_jump_phases(self):
        """Multiplying any jump operator by a unit phase leaves the residual unchanged"""
        triple = (0.3 + 0.1j, 0.7j, 0.2 - 0.4j)
        models = [
            one_spin_btc(OneSpinBtcParams(g=0.7, kappa=1.3, S=3)),
            one_spin_pt(OneSpinPtParams(g=1.0, kappa=1.0, p=0.5, S=2)),
            general_one_spin_class(ClassParams(g=1.0, kappa=0.8, triples=(triple, pt_partner(triple)), S=2)),
            general_one_spin_class(ClassParams(g=1.0, kappa=0.8, triples=(triple, DEPHASING_TRIPLE), S=2)),
        ]
        for model in models:
            phases = np.exp(1j * np.array([0.37, -1.9, 2.6])[:len(model.dissipators)])
            phased = dataclasses.replace(model, dissipators=tuple(
                (rate, OperatorMatrix(model.space, phase * op.data, label=f'phased {op.label}'))
                for phase, (rate, op) in zip(phases, model.dissipators)
            ))
            before, after = check_liouvillian_pt(model), check_liouvillian_pt(phased)
            self.assertLessEqual(abs(before - after), 1e-12 * max(1.0, before), msg=model.label)
            self.assertEqual(is_pt_symmetric(model), is_pt_symmetric(phased))


class TestDissipatorClass(unittest.TestCase):
    """Test the (α, β, γ) dissipator class"""

    def setUp(self):
        self.space = SpinSpace.from_spin(2)
        self.ops = build_spin_operators(self.space)

    def test_reference_triples(self):
        """The BTC and dephasing triples rebuild S- and Sz"""
        np.testing.assert_allclose(class_jump(self.space, BTC_TRIPLE).data, self.ops.sminus.data, atol=1e-12)
        np.testing.assert_allclose(class_jump(self.space, DEPHASING_TRIPLE).data, self.ops.sz.data, atol=1e-12)

    def test_balance(self):
        """Balanced means Σ|α|² = Σ|β|²"""
        self.assertTrue(is_balanced(ClassParams(triples=(BTC_TRIPLE,))))
        self.assertFalse(is_balanced(ClassParams(triples=((1.0, 0.0, 0.0),))))
        self.assertEqual(gain_loss_weights([BTC_TRIPLE, DEPHASING_TRIPLE]), (0.5, 0.5, 1.0))

    def test_balance_ignores_phases(self):
        """Per-dissipator phases and the phased partner map keep the balance verdict"""
        triple = (0.3 + 0.1j, 0.7j, 0.2 - 0.4j)
        phase = np.exp(0.37j)
        self.assertTrue(is_balanced(ClassParams(triples=(tuple(phase * c for c in BTC_TRIPLE),))))
        self.assertFalse(is_balanced(ClassParams(triples=(triple,))))
        self.assertFalse(is_balanced(ClassParams(triples=(tuple(phase * c for c in triple),))))
        for theta in (0.0, 0.4, 2.1):
            self.assertTrue(is_balanced(ClassParams(triples=(triple, pt_partner(triple, theta)))))

    def test_from_model_dissipators(self):
        """The BTC jump decomposes into the BTC triple and rebuilds the same Liouvillian"""
        params = OneSpinBtcParams(g=0.8, kappa=0.5, S=2)
        btc = one_spin_btc(params)
        triples = from_model_dissipators(btc)
        self.assertEqual(len(triples), 1)
        np.testing.assert_allclose(triples[0], BTC_TRIPLE, atol=1e-12)

        member = general_one_spin_class(ClassParams(g=2 * params.g, kappa=params.kappa, triples=triples, S=2))
        np.testing.assert_allclose(build_liouvillian(member).matrix, build_liouvillian(btc).matrix, atol=1e-12)

    def test_from_model_dissipators_rescales_rates(self):
        """A chosen κ rescales the triples so the dissipator is unchanged"""
        btc = one_spin_btc(OneSpinBtcParams(g=1.0, kappa=0.5, S=2))
        triples = from_model_dissipators(btc, kappa=2.0)
        np.testing.assert_allclose(triples[0], tuple(0.5 * c for c in BTC_TRIPLE), atol=1e-12)
        two_spin = two_spin_pt(TwoSpinParams(S=1))
        with self.assertRaises(InvalidParameterError):
            from_model_dissipators(two_spin)
        closed = one_spin_btc(OneSpinBtcParams(g=1.0, kappa=0.0, S=1))
        with self.assertRaises(InvalidParameterError):
            from_model_dissipators(closed)

    def test_pt_partner(self):
        """The partner is an involution and the BTC triple is its own partner"""
        triple = (0.3 + 0.1j, 0.7j, 0.2 - 0.4j)
        np.testing.assert_allclose(pt_partner(pt_partner(triple)), triple)
        np.testing.assert_allclose(pt_partner(BTC_TRIPLE), BTC_TRIPLE)

    def test_partner_pairs_are_pt_symmetric(self):
        """A triple together with its partner gives a PT-symmetric Liouvillian"""
        triple = (0.3 + 0.1j, 0.7j, 0.2 - 0.4j)
        symmetric = general_one_spin_class(ClassParams(g=1.0, kappa=0.8, triples=(triple, pt_partner(triple)), S=2))
        self.assertLessEqual(check_liouvillian_pt(symmetric), 1e-12)
        single = general_one_spin_class(ClassParams(g=1.0, kappa=0.8, triples=(triple,), S=2))
        self.assertGreater(check_liouvillian_pt(single), 1e-3)

    def test_triple_parsing(self):
        """Triples may be written as text or [re, im] pairs; empty sets are rejected"""
        params = ClassParams(triples=[['-0.5j', [0, 0.5], 0]])
        self.assertEqual(params.triples, ((-0.5j, 0.5j, 0j),))
        with self.assertRaises(InvalidParameterError):
            ClassParams(triples=())
        with self.assertRaises(InvalidParameterError):
            ClassParams(triples=[[1, 2]])

    def test_class_rates(self):
        """Every jump carries the rate κ/S"""
        model = general_one_spin_class(ClassParams(kappa=0.8, triples=(BTC_TRIPLE, DEPHASING_TRIPLE), S=2))
        self.assertEqual([rate for rate, _ in model.dissipators], [0.4, 0.4])


class TestDephasingDynamics(unittest.TestCase):
    """Test the oscillation lifetime of H = g Sx, L = Sz"""

    def decay_time(self, S: int) -> float:
        """First time the one-period maximum of |⟨Sz⟩/S| drops below its initial value / e"""
        params = ClassParams(g=1.0, kappa=1.0, triples=(DEPHASING_TRIPLE,), S=S)
        model = general_one_spin_class(params)
        times = np.linspace(0.0, 200.0, 4001)
        rho0 = DensityMatrix.from_ket(params.space, spin_state(params.space, S / 2))
        sz = build_spin_operators(params.space).sz
        signal = np.array([expectation(rho, sz).real for rho in evolve(build_liouvillian(model), rho0, times)]) / S

        window = int(round(2 * np.pi / (times[1] - times[0])))
        threshold = abs(signal[0]) / np.e
        for k in range(len(times) - window):
            if np.max(np.abs(signal[k:k + window])) < threshold:
                return float(times[k])
        self.fail(f"S={S}: envelope stays above 1/e up to t = {times[-window]}")

    def test_decay_time_grows_with_S(self):
        """τ(10) < τ(20) < τ(40)"""
        taus = [self.decay_time(S) for S in (10, 20, 40)]
        self.assertLess(taus[0], taus[1], msg=str(taus))
        self.assertLess(taus[1], taus[2], msg=str(taus))


class TestTwoSpin(unittest.TestCase):
    """Test the two-spin gain/loss model"""

    def test_dimension_and_cap(self):
        """The product space has (2S+1)² states and S is capped"""
        model = two_spin_pt(TwoSpinParams(S=1.5))
        self.assertEqual(model.dim, 16)
        with self.assertRaises(CapExceededError):
            two_spin_pt(TwoSpinParams(S=5))

    def test_symmetry_parameter_grows_with_gain_loss(self):
        """Δ of the stationary state is larger deep in the broken phase"""
        deltas = []
        for gamma in (0.5, 4.0):
            model = two_spin_pt(TwoSpinParams(g=1.0, gamma_gain=gamma, gamma_loss=gamma, S=2))
            deltas.append(symmetry_delta(stationary_state(build_liouvillian(model))))
        for delta in deltas:
            self.assertGreaterEqual(delta, 0.0)
            self.assertLessEqual(delta, 1.0)
        self.assertLess(deltas[0], deltas[1])

    def test_infinite_spin_oracle(self):
        """S = ∞ closed forms on both sides of Γ = g"""
        unbroken = two_spin_infinite_S(1.0, 0.6)
        self.assertFalse(unbroken.broken)
        self.assertEqual(unbroken.delta, 0.0)
        self.assertAlmostEqual(unbroken.imag_base, 0.8)

        broken = two_spin_infinite_S(1.0, 2.0)
        self.assertTrue(broken.broken)
        self.assertAlmostEqual(broken.delta, 0.75)
        self.assertAlmostEqual(broken.purity, 0.75)
        self.assertEqual(broken.imag_base, 0.0)
        self.assertEqual((broken.beta_plus, broken.beta_minus), (1.5, 0.5))
        self.assertEqual(broken.broken_eigenvalues(1), [0.0, -1.0, -3.0, -4.0])

        with self.assertRaises(InvalidParameterError):
            unbroken.broken_eigenvalues(2)
        with self.assertRaises(ExceptionalPointError):
            two_spin_infinite_S(1.0, 1.0)

    def test_oracle_needs_balance(self):
        """The family oracle refuses unequal gain and loss"""
        family = get_family('two-spin')
        with self.assertRaises(InvalidParameterError):
            family.infinite_S(TwoSpinParams(gamma_gain=2.0, gamma_loss=1.0))
        self.assertTrue(family.infinite_S(TwoSpinParams(g=1.0, gamma_gain=3.0, gamma_loss=3.0)).broken)


if __name__ == '__main__':
    unittest.main()
