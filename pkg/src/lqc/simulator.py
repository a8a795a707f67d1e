"""State-vector simulation with hyper-postselected measurement.

Gates touch amplitudes through axis views of the state tensor, so one
instruction costs O(2^N * 2^arity) regardless of register size; the full
register matrix is never materialized. Measurement keeps only amplitudes
with every hybit in state 0 and renormalizes over that subspace.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Instruction, validate_instruction
from .core import (
    BitKind,
    LqcError,
    RegisterLayout,
    StateVector,
    basis_state,
    metric_vector,
)

RNG_ALGORITHM = "Philox"
# postselecting below this fraction of the positive mass is numerically
# meaningless; observe() still answers but raises a warning
NEGLIGIBLE_MASS_RATIO = 1e-12


class ZeroObservableMassError(LqcError):
    """The state has no amplitude left on the observable subspace."""


class NegligibleMassWarning(UserWarning):
    pass


def apply_to_tensor(layout: RegisterLayout, tensor: np.ndarray, instr: Instruction) -> None:
    """Apply one instruction in place to a state tensor of shape [2]*num_bits
    (optionally with trailing batch axes). Controls fix their axes at 1, so
    only the all-ones control block is touched."""
    gate = instr.gate_matrix()
    tpos = [r.position(layout) for r in instr.targets]
    cpos = [r.position(layout) for r in instr.controls]

    idx = [slice(None)] * tensor.ndim
    for c in cpos:
        idx[c] = 1
    sub = tensor[tuple(idx)]
    remaining = [p for p in range(layout.num_bits) if p not in cpos]
    tpos_sub = [remaining.index(p) for p in tpos]
    moved = np.moveaxis(sub, tpos_sub, range(len(tpos)))
    d = 1 << len(tpos)
    updated = gate @ moved.reshape(d, -1)
    moved[...] = updated.reshape(moved.shape)


def apply(state: StateVector, instr: Instruction) -> StateVector:
    """Apply one instruction to the state, in place. Refuses instructions
    whose gate does not preserve the local metric."""
    validate_instruction(state.layout, instr)
    tensor = state.amps.reshape([2] * state.layout.num_bits)
    apply_to_tensor(state.layout, tensor, instr)
    return state


def run(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Run a circuit on a copy of the initial state (default |0...0>)."""
    if initial is None:
        state = basis_state(circuit.layout, [0] * circuit.layout.num_bits)
    else:
        if initial.layout != circuit.layout:
            raise LqcError("initial state layout does not match circuit layout")
        state = initial.copy()
    tensor = state.amps.reshape([2] * circuit.layout.num_bits)
    for instr in circuit.instructions:
        apply_to_tensor(circuit.layout, tensor, instr)
    return state


@dataclass
class OutcomeDistribution:
    """Hyper-postselected outcome probabilities, keyed by qubit bitstring
    (qubits in layout order). Empty when nothing is observable."""

    probabilities: dict[str, float]
    observable_mass: float

    def __post_init__(self) -> None:
        if self.probabilities:
            total = sum(self.probabilities.values())
            if abs(total - 1.0) > 1e-9:
                raise LqcError(f"probabilities sum to {total}, not 1")


def observe(state: StateVector) -> OutcomeDistribution:
    """Probability of each qubit bitstring conditioned on every hybit being
    observed in state 0. A state with zero observable mass yields an empty
    distribution rather than an error."""
    layout = state.layout
    tensor = state.amps.reshape([2] * layout.num_bits)
    idx = [slice(None)] * layout.num_bits
    for p in layout.positions(BitKind.HYBIT):
        idx[p] = 0
    visible = np.ascontiguousarray(tensor[tuple(idx)]).reshape(-1)
    mag2 = visible.real**2 + visible.imag**2
    mass = float(mag2.sum())

    signs = metric_vector(layout).astype(np.float64)
    all_mag2 = state.amps.real**2 + state.amps.imag**2
    positive_mass = float(all_mag2[signs > 0].sum())
    if mass == 0.0:
        return OutcomeDistribution({}, 0.0)
    if mass < NEGLIGIBLE_MASS_RATIO * positive_mass:
        warnings.warn(
            f"observable mass {mass:.3g} is below {NEGLIGIBLE_MASS_RATIO:g} of the "
            f"positive mass {positive_mass:.3g}; postselection is numerically meaningless",
            NegligibleMassWarning,
            stacklevel=2,
        )

    nq = layout.num_qubits
    probs: dict[str, float] = {}
    for j in np.flatnonzero(mag2):
        key = format(int(j), f"0{nq}b") if nq else ""
        probs[key] = float(mag2[j] / mass)
    return OutcomeDistribution(probs, mass)


@dataclass
class SampleResult:
    counts: Counter = field(default_factory=Counter)
    shots: int = 0
    seed: int = 0
    rng_algorithm: str = RNG_ALGORITHM


def sample(state: StateVector, shots: int, seed: int) -> SampleResult:
    """Draw i.i.d. measurement shots; deterministic per seed (counter-based
    generator, inverse CDF over the sorted outcome list)."""
    if shots < 0:
        raise LqcError("shot count must be nonnegative")
    dist = observe(state)
    if dist.observable_mass == 0.0:
        raise ZeroObservableMassError("state has zero observable mass")
    outcomes = sorted(dist.probabilities)
    cdf = np.cumsum([dist.probabilities[o] for o in outcomes])
    cdf[-1] = 1.0
    rng = np.random.Generator(np.random.Philox(seed))
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    counts = Counter(outcomes[i] for i in draws)
    return SampleResult(counts=counts, shots=shots, seed=seed)


def format_distribution(dist: OutcomeDistribution) -> str:
    """Shared text form: observable-mass header, then bitstring/probability
    lines (tab separated, 17 significant digits, sorted by bitstring)."""
    lines = [f"# observable_mass = {dist.observable_mass:.17g}"]
    for key in sorted(dist.probabilities):
        lines.append(f"{key}\t{dist.probabilities[key]:.17g}")
    return "\n".join(lines) + "\n"
