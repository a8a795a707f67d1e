import numpy as np
import pytest

from conftest import random_circuit, random_layout, random_state_amps
from lqc.circuit import BitRef, Circuit, Instruction, parse, to_matrix
from lqc.core import (
    BitKind,
    LqcError,
    RegisterLayout,
    StateVector,
    basis_state,
    pseudo_norm,
)
from lqc.simulator import (
    NegligibleMassWarning,
    OutcomeDistribution,
    ZeroObservableMassError,
    apply,
    format_distribution,
    observe,
    run,
    sample,
)

Q0 = BitRef(BitKind.QUBIT, 0)
H0 = BitRef(BitKind.HYBIT, 0)


class TestApply:
    def test_hadamard(self):
        state = basis_state(RegisterLayout.of(1, 0), [0])
        apply(state, Instruction("H", (Q0,)))
        assert np.allclose(state.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)

    def test_boost_column_action(self):
        chi = 0.9
        state = basis_state(RegisterLayout.of(0, 1), [0])
        apply(state, Instruction("BOOST", (H0,), (), chi))
        assert np.allclose(state.amps, [np.cosh(chi), np.sinh(chi)], atol=1e-15)

    def test_controlled_boost(self):
        chi = 0.6
        layout = RegisterLayout.of(1, 1)
        state = basis_state(layout, [1, 0])
        apply(state, Instruction("BOOST", (H0,), (Q0,), chi))
        assert np.allclose(state.amps, [0, 0, np.cosh(chi), np.sinh(chi)], atol=1e-15)

    def test_control_off_does_nothing(self):
        layout = RegisterLayout.of(1, 1)
        state = basis_state(layout, [0, 0])
        apply(state, Instruction("BOOST", (H0,), (Q0,), 1.0))
        assert np.allclose(state.amps, [1, 0, 0, 0], atol=0)

    def test_refuses_non_isometric(self):
        state = basis_state(RegisterLayout.of(0, 1), [0])
        with pytest.raises(LqcError):
            apply(state, Instruction("X", (H0,)))

    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_dense_matrix(self, seed):
        rng = np.random.default_rng(seed)
        layout = random_layout(rng, max_bits=6)
        circ = random_circuit(rng, layout, 12)
        amps = random_state_amps(rng, layout.dimension)
        expected = to_matrix(circ) @ amps
        got = run(circ, StateVector(layout, amps.copy()))
        assert np.allclose(got.amps, expected, atol=1e-12)


class TestRun:
    def test_empty_circuit(self):
        layout = RegisterLayout.of(2, 0)
        state = basis_state(layout, [1, 0])
        out = run(Circuit(layout), state)
        assert np.array_equal(out.amps, state.amps)

    def test_initial_not_mutated(self):
        layout = RegisterLayout.of(1, 0)
        state = basis_state(layout, [0])
        run(parse("qubits 1\nH q0\n"), state)
        assert np.array_equal(state.amps, [1, 0])

    def test_double_controlled_sign_flip(self):
        circ = parse("qubits 3\nCTRL q0 q1 : Z q2\n")
        out = run(circ, basis_state(circ.layout, [1, 1, 1]))
        expected = np.zeros(8)
        expected[7] = -1.0
        assert np.allclose(out.amps, expected, atol=0)

    def test_layout_mismatch(self):
        with pytest.raises(LqcError):
            run(Circuit(RegisterLayout.of(2, 0)), basis_state(RegisterLayout.of(1, 0), [0]))

    @pytest.mark.parametrize("seed", range(20))
    def test_pseudo_norm_conserved(self, seed):
        rng = np.random.default_rng(1000 + seed)
        layout = random_layout(rng, max_bits=8)
        circ = random_circuit(rng, layout, 30)
        state = StateVector(layout, random_state_amps(rng, layout.dimension))
        before = pseudo_norm(state)
        after = pseudo_norm(run(circ, state))
        assert abs(after - before) <= 1e-9 * max(1.0, abs(before))


class TestObserve:
    def test_simplest_register_formula(self):
        layout = RegisterLayout.of(1, 1)
        a = np.array([0.5, 0.3j, 0.7, 0.2])
        dist = observe(StateVector(layout, a))
        denom = 0.25 + 0.49
        assert dist.observable_mass == pytest.approx(denom, abs=1e-15)
        assert dist.probabilities["0"] == pytest.approx(0.25 / denom, abs=1e-15)
        assert dist.probabilities["1"] == pytest.approx(0.49 / denom, abs=1e-15)

    def test_basis_zero(self):
        dist = observe(basis_state(RegisterLayout.of(2, 1), [0, 0, 0]))
        assert dist.probabilities == {"00": 1.0}
        assert dist.observable_mass == 1.0

    def test_uniform(self):
        layout = RegisterLayout.of(1, 1)
        dist = observe(StateVector(layout, np.full(4, 0.5)))
        assert dist.probabilities["0"] == pytest.approx(0.5)
        assert dist.probabilities["1"] == pytest.approx(0.5)

    def test_quantum_limit(self):
        # with no hybits this is ordinary quantum measurement
        rng = np.random.default_rng(5)
        layout = RegisterLayout.of(3, 0)
        amps = random_state_amps(rng, 8)
        amps /= np.linalg.norm(amps)
        dist = observe(StateVector(layout, amps))
        assert dist.observable_mass == pytest.approx(1.0, abs=1e-12)
        for j in range(8):
            key = format(j, "03b")
            assert dist.probabilities[key] == pytest.approx(abs(amps[j]) ** 2, abs=1e-12)

    def test_sums_to_one(self):
        rng = np.random.default_rng(6)
        layout = RegisterLayout(("q", "h", "q"))
        dist = observe(StateVector(layout, random_state_amps(rng, 8)))
        assert sum(dist.probabilities.values()) == pytest.approx(1.0, abs=1e-12)

    def test_zero_mass_is_signaled_not_raised(self):
        layout = RegisterLayout.of(0, 1)
        dist = observe(StateVector(layout, np.array([0.0, 1.0])))
        assert dist.observable_mass == 0.0
        assert dist.probabilities == {}

    def test_negligible_mass_warning(self):
        layout = RegisterLayout.of(0, 2)
        amps = np.zeros(4)
        amps[0] = 1e-8   # observable but vanishing
        amps[3] = 1.0    # positive-metric yet unobservable
        with pytest.warns(NegligibleMassWarning):
            observe(StateVector(layout, amps))


class TestSample:
    def test_deterministic_state(self):
        res = sample(basis_state(RegisterLayout.of(2, 0), [1, 0]), 50, seed=1)
        assert res.counts == {"10": 50}

    def test_same_seed_same_result(self):
        layout = RegisterLayout.of(1, 0)
        state = StateVector(layout, np.array([1, 1]) / np.sqrt(2))
        a = sample(state, 1000, seed=9)
        b = sample(state, 1000, seed=9)
        assert a.counts == b.counts

    def test_binomial_bound(self):
        layout = RegisterLayout.of(1, 0)
        state = StateVector(layout, np.array([1, 1]) / np.sqrt(2))
        shots = 100_000
        res = sample(state, shots, seed=123)
        sigma = np.sqrt(shots * 0.25)
        assert abs(res.counts["0"] - shots / 2) <= 5 * sigma

    def test_zero_shots(self):
        res = sample(basis_state(RegisterLayout.of(1, 0), [0]), 0, seed=0)
        assert res.counts == {}

    def test_zero_mass_raises(self):
        layout = RegisterLayout.of(0, 1)
        with pytest.raises(ZeroObservableMassError):
            sample(StateVector(layout, np.array([0.0, 1.0])), 10, seed=0)

    def test_rng_algorithm_recorded(self):
        res = sample(basis_state(RegisterLayout.of(1, 0), [0]), 1, seed=0)
        assert res.rng_algorithm == "Philox"


class TestDistributionFormat:
    def test_layout(self):
        dist = OutcomeDistribution({"0": 0.25, "1": 0.75}, 0.5)
        text = format_distribution(dist)
        lines = text.splitlines()
        assert lines[0] == "# observable_mass = 0.5"
        assert lines[1] == "0\t0.25"
        assert lines[2] == "1\t0.75"

    def test_sorted_keys(self):
        dist = OutcomeDistribution({"11": 0.5, "00": 0.5}, 1.0)
        lines = format_distribution(dist).splitlines()
        assert lines[1].startswith("00") and lines[2].startswith("11")

    def test_probability_check(self):
        with pytest.raises(LqcError):
            OutcomeDistribution({"0": 0.4}, 1.0)
