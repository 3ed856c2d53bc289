import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ALPHA
from gkpprep.errors import DegenerateMeasurementError, DomainError
from gkpprep.oscillator import GaussianComb, Quadrature, overlap, squeezed_vacuum
from gkpprep.protocol import (
    ProtocolConfig,
    QubitOscState,
    conditional_displacement,
    default_grid,
    encoded_comb,
    encoded_momentum_closed_form,
    enumerate_branches,
    hadamard,
    measure_qubit,
    prepare,
    prepared_grids,
    run_outcomes,
    sample_bits,
    sample_run,
)


def close(a, b, tol=1e-12):
    """Both branches agree in L2 distance."""
    for x, y in ((a.branch0, b.branch0), (a.branch1, b.branch1)):
        if x is None or y is None:
            assert (x is None or x.norm_squared < tol**2) and (y is None or y.norm_squared < tol**2)
            continue
        d2 = x.norm_squared + y.norm_squared - 2 * overlap(x, y).real
        assert d2 < tol**2


PSI = squeezed_vacuum(0.15)
PHI = GaussianComb(0.15, "q", [-1.0, 2.0], [0.3, 0.4j])


class TestConfig:
    def test_defaults(self):
        c = ProtocolConfig()
        assert c.alpha == ALPHA and c.delta == 0.15 and c.n == 3

    def test_iteration_cap(self):
        with pytest.raises(DomainError):
            ProtocolConfig(n=17)
        with pytest.raises(DomainError):
            ProtocolConfig(n=13, mode="deterministic")

    def test_warns_when_peaks_overlap(self):
        with pytest.warns(UserWarning):
            ProtocolConfig(delta=2.0)

    @pytest.mark.parametrize("kw", [dict(alpha=0), dict(delta=-1), dict(bit=2), dict(mode="x"), dict(n=-1)])
    def test_rejects(self, kw):
        with pytest.raises(DomainError), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ProtocolConfig(**kw)


class TestHadamard:
    def test_on_ground_qubit(self):
        out = hadamard(QubitOscState(PSI))
        close(out, QubitOscState(PSI / math.sqrt(2), PSI / math.sqrt(2)))

    def test_involution(self):
        s = QubitOscState(PSI * 0.6, PHI)
        close(hadamard(hadamard(s)), s)

    def test_general_input(self):
        r = 1 / math.sqrt(2)
        s = QubitOscState((PSI + PHI) * r, (PSI - PHI) * r)
        close(hadamard(s), QubitOscState(PSI, PHI))


class TestConditionalDisplacement:
    def test_branch_directions(self):
        plus = hadamard(QubitOscState(PSI))
        out = conditional_displacement(plus, ALPHA)
        close(out, QubitOscState(PSI.shifted(ALPHA) / math.sqrt(2), PSI.shifted(-ALPHA) / math.sqrt(2)))

    def test_zero_is_identity(self):
        s = QubitOscState(PSI * 0.6, PHI)
        close(conditional_displacement(s, 0.0), s)

    def test_inverse_pair(self):
        s = QubitOscState(PSI * 0.6, PHI)
        close(conditional_displacement(conditional_displacement(s, 0.7), -0.7), s)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-10, 10), st.sampled_from(["q", "p"]))
    def test_norm_preserved(self, d, axis):
        s = QubitOscState(PSI * 0.6, PHI)
        assert conditional_displacement(s, d, axis).norm_squared == pytest.approx(s.norm_squared, abs=1e-12)


class TestMeasure:
    def _first_step(self):
        s = hadamard(QubitOscState(PSI))
        return hadamard(conditional_displacement(s, ALPHA))

    def test_outcome_zero(self):
        p, psi = measure_qubit(self._first_step(), 0)
        assert p == pytest.approx(0.5, abs=1e-9)
        expect = (PSI.shifted(ALPHA) + PSI.shifted(-ALPHA)).normalize()
        assert abs(overlap(psi, expect)) == pytest.approx(1.0, abs=1e-12)

    def test_outcome_one(self):
        # Direct linear algebra: H D H |0> psi gives |1> (psi(q-a) - psi(q+a)) / 2.
        p, psi = measure_qubit(self._first_step(), 1)
        minus = PSI.shifted(ALPHA) - PSI.shifted(-ALPHA)
        assert p == pytest.approx(minus.norm_squared / 4, abs=1e-15)
        assert p == pytest.approx(0.5, abs=1e-9)
        assert abs(overlap(psi, minus.normalize())) == pytest.approx(1.0, abs=1e-12)

    def test_outcomes_sum_to_one(self):
        s = self._first_step()
        assert measure_qubit(s, 0)[0] + measure_qubit(s, 1)[0] == pytest.approx(1.0, abs=1e-12)

    def test_certain_outcome(self):
        assert measure_qubit(QubitOscState(PSI), 0)[0] == pytest.approx(1.0, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateMeasurementError):
            measure_qubit(QubitOscState(PSI), 1)

    def test_unnormalized_input(self):
        with pytest.raises(DomainError):
            measure_qubit(QubitOscState(PSI * 2), 0)


class TestPrepare:
    def test_logical_one_n3(self):
        rec = prepare(ProtocolConfig(n=3))
        assert len(rec.state) == 8
        assert rec.probability == pytest.approx(1 / 8, abs=1e-9)
        expect = ALPHA * (1 + 8 - 2 * np.arange(1, 9))
        np.testing.assert_allclose(rec.state.centers, np.sort(expect), atol=1e-12)
        np.testing.assert_allclose(rec.state.coeffs, rec.state.coeffs[0], atol=1e-12)

    def test_matches_direct_comb(self):
        for n in range(0, 7):
            for bit in (0, 1):
                cfg = ProtocolConfig(n=n, bit=bit)
                a, b = prepare(cfg).state, encoded_comb(cfg)
                d2 = a.norm_squared + b.norm_squared - 2 * overlap(a, b).real
                assert math.sqrt(max(d2, 0)) < 1e-10

    def test_n0_is_squeezed_vacuum(self):
        rec = prepare(ProtocolConfig(n=0))
        assert rec.probability == 1.0 and rec.bits == ()
        assert abs(overlap(rec.state, squeezed_vacuum(0.15))) == pytest.approx(1.0, abs=1e-15)

    def test_bit0_n2_peaks(self):
        rec = prepare(ProtocolConfig(n=2, bit=0))
        np.testing.assert_allclose(rec.state.centers / ALPHA, [-2, 0, 2, 4], atol=1e-12)

    def test_probability_is_product_of_steps(self):
        rec = prepare(ProtocolConfig(n=4))
        assert rec.probability == pytest.approx(np.prod(rec.step_probabilities), rel=1e-15)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_success_probability_close_to_power_of_two(self, n):
        assert abs(prepare(ProtocolConfig(n=n)).probability - 2.0**-n) < 1e-12

    def test_normalization_factor_near_one(self):
        for n in range(1, 6):
            assert prepare(ProtocolConfig(n=n)).norm_factor == pytest.approx(1.0, abs=1e-6)

    def test_momentum_closed_form(self):
        cfg = ProtocolConfig(n=3)
        _, mom = prepared_grids(cfg)
        ref = encoded_momentum_closed_form(mom.coords, cfg)
        assert np.max(np.abs(mom.amplitudes - ref)) < 1e-6

    def test_momentum_closed_form_bit0(self):
        cfg = ProtocolConfig(n=2, bit=0)
        _, mom = prepared_grids(cfg)
        assert np.max(np.abs(mom.amplitudes - encoded_momentum_closed_form(mom.coords, cfg))) < 1e-6

    def test_closed_form_singular_limit(self):
        cfg = ProtocolConfig(n=3)
        ks = np.arange(-4, 5)
        at = encoded_momentum_closed_form(ks * math.pi / ALPHA, cfg)
        near = encoded_momentum_closed_form(ks * math.pi / ALPHA + 1e-6, cfg)
        np.testing.assert_allclose(at, near, atol=1e-4)

    def test_momentum_axis_variant(self):
        cfg = ProtocolConfig(n=3, axis="p")
        rec = prepare(cfg)
        assert rec.state.axis is Quadrature.MOMENTUM
        np.testing.assert_allclose(rec.state.centers, ALPHA * (1 + 8 - 2 * np.arange(8, 0, -1)), atol=1e-12)


class TestBranches:
    def test_n1(self):
        recs = enumerate_branches(ProtocolConfig(n=1))
        assert [r.bits for r in recs] == [(0,), (1,)]
        for r in recs:
            assert r.probability == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_completeness(self, n):
        total = math.fsum(r.probability for r in enumerate_branches(ProtocolConfig(n=n)))
        assert abs(total - 1) < 1e-10

    def test_mixed_sign_ancilla(self):
        rec = run_outcomes(ProtocolConfig(n=3), (1, 0, 1))
        ref = prepare(ProtocolConfig(n=3)).state
        np.testing.assert_allclose(rec.state.centers, ref.centers, atol=1e-12)
        signs = np.sign(rec.state.coeffs.real)
        assert set(signs) == {-1.0, 1.0}
        np.testing.assert_allclose(np.abs(rec.state.coeffs), np.abs(ref.coeffs), rtol=1e-9)

    def test_branch_matches_enumeration(self):
        cfg = ProtocolConfig(n=3)
        for rec in enumerate_branches(cfg):
            direct = run_outcomes(cfg, rec.bits)
            assert direct.probability == pytest.approx(rec.probability, rel=1e-14)
            assert abs(overlap(direct.state, rec.state)) == pytest.approx(1.0, abs=1e-12)

    def test_sign_patterns_are_walsh_functions(self):
        # Outcome b_k multiplies the peaks by the k-th Rademacher function.
        cfg = ProtocolConfig(n=3)
        s = np.arange(8)
        for rec in enumerate_branches(cfg):
            want = np.ones(8)
            for k, b in enumerate(rec.bits):
                if b:
                    want *= np.where((s >> k) & 1, -1.0, 1.0)
            got = np.sign(rec.state.coeffs.real)
            assert np.array_equal(got, want) or np.array_equal(got, -want)

    def test_wrong_length(self):
        with pytest.raises(DomainError):
            run_outcomes(ProtocolConfig(n=3), (0, 1))


class TestSampling:
    def test_seeded_reproducible(self):
        cfg = ProtocolConfig(n=2, mode="sample", seed=1234)
        assert sample_run(cfg).bits == sample_run(cfg).bits
        np.testing.assert_array_equal(sample_bits(cfg, 50), sample_bits(cfg, 50))

    def test_sample_run_matches_bits_stream(self):
        cfg = ProtocolConfig(n=4, mode="sample", seed=7)
        runs = [sample_run(cfg, np.random.default_rng(i)).bits for i in range(200)]
        freq0 = np.mean([r == (0, 0, 0, 0) for r in runs])
        assert abs(freq0 - 1 / 16) < 4 * math.sqrt(1 / 16 * 15 / 16 / 200)

    def test_n1_frequency(self):
        bits = sample_bits(ProtocolConfig(n=1, mode="sample", seed=2024), 100_000)
        assert abs(np.mean(bits[:, 0] == 0) - 0.5) <= 3 * math.sqrt(0.25 / 1e5)

    def test_n3_all_zero_frequency(self):
        bits = sample_bits(ProtocolConfig(n=3, mode="sample", seed=2025), 100_000)
        freq = np.mean(np.all(bits == 0, axis=1))
        assert abs(freq - 0.125) <= 3 * math.sqrt(0.125 * 0.875 / 1e5)


class TestEnergy:
    def test_grows_like_four_to_the_n(self):
        from gkpprep.analysis import mean_energy

        d = 0.15
        base = (d**2 + d**-2) / 4
        for n in range(1, 5):
            cfg = ProtocolConfig(n=n)
            e = mean_energy(default_grid(cfg).sample(prepare(cfg).state))
            # Equal-weight comb of 2^n peaks spaced 2 alpha adds alpha^2 (4^n - 1) / 6 to <q^2>/2.
            assert e == pytest.approx(base + ALPHA**2 * (4**n - 1) / 6, rel=1e-6)
            assert e > 0.2 * 4**n
