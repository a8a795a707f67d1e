"""Registers, the indefinite metric, and state-vector bookkeeping.

A register is an ordered list of two-level systems.  Qubits carry the
positive-definite metric diag(1, 1); hybits carry the indefinite metric
diag(1, -1).  The register metric is the Kronecker product of the per-bit
metrics, so the sign attached to a basis index depends only on the parity
of the hybit bits set in it.

Basis indices are big-endian: bit 0 of the register is the most
significant bit of the index, i.e. |d0, d1, ..., d(N-1)> sits at index
sum_p dp * 2^(N-1-p).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# Centralized tolerances. EPS_ISO gates isometry checks, EPS_RECON gates
# synthesis roundtrips; everything else derives from these two.
EPS_ISO = 1e-10
EPS_RECON = 1e-8


class LqcError(Exception):
    """Base class for errors raised by this package."""


class GuardError(LqcError):
    """A numeric or resource guard refused the operation."""


class IsometryError(LqcError):
    """A matrix failed the metric-isometry requirement where one is mandatory."""


class BitKind(str, Enum):
    QUBIT = "q"
    HYBIT = "h"

    def metric_diag(self) -> np.ndarray:
        if self is BitKind.QUBIT:
            return np.array([1.0, 1.0])
        return np.array([1.0, -1.0])


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered bit kinds. Canonical layouts put all qubits before all hybits,
    but nothing below depends on that ordering."""

    kinds: tuple[BitKind, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kinds", tuple(BitKind(k) for k in self.kinds))

    @classmethod
    def of(cls, num_qubits: int, num_hybits: int) -> "RegisterLayout":
        if num_qubits < 0 or num_hybits < 0:
            raise ValueError("bit counts must be nonnegative")
        return cls((BitKind.QUBIT,) * num_qubits + (BitKind.HYBIT,) * num_hybits)

    @property
    def num_bits(self) -> int:
        return len(self.kinds)

    @property
    def num_qubits(self) -> int:
        return sum(1 for k in self.kinds if k is BitKind.QUBIT)

    @property
    def num_hybits(self) -> int:
        return sum(1 for k in self.kinds if k is BitKind.HYBIT)

    @property
    def dimension(self) -> int:
        return 1 << self.num_bits

    @property
    def is_canonical(self) -> bool:
        seen_hybit = False
        for k in self.kinds:
            if k is BitKind.HYBIT:
                seen_hybit = True
            elif seen_hybit:
                return False
        return True

    def positions(self, kind: BitKind) -> tuple[int, ...]:
        return tuple(p for p, k in enumerate(self.kinds) if k is kind)

    def bit_weight(self, position: int) -> int:
        """Integer weight of register bit `position` (bit 0 is the MSB)."""
        if not 0 <= position < self.num_bits:
            raise IndexError(f"bit position {position} out of range")
        return 1 << (self.num_bits - 1 - position)

    @property
    def hybit_index_mask(self) -> int:
        mask = 0
        for p in self.positions(BitKind.HYBIT):
            mask |= self.bit_weight(p)
        return mask


def metric_sign(layout: RegisterLayout, index: int) -> int:
    """Diagonal entry of the register metric at a basis index: -1 iff an odd
    number of hybits are in state 1."""
    if not 0 <= index < layout.dimension:
        raise IndexError(f"basis index {index} out of range for {layout.num_bits} bits")
    parity = bin(index & layout.hybit_index_mask).count("1") & 1
    return -1 if parity else 1


def metric_vector(layout: RegisterLayout) -> np.ndarray:
    """All diagonal metric entries at once, as a +-1 int8 array of length
    layout.dimension. Computed, never stored per-state."""
    idx = np.arange(layout.dimension, dtype=np.uint64)
    parity = (np.bitwise_count(idx & np.uint64(layout.hybit_index_mask)) & 1).astype(np.int8)
    return (1 - 2 * parity).astype(np.int8)


@dataclass
class StateVector:
    layout: RegisterLayout
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (self.layout.dimension,):
            raise ValueError(
                f"amplitude array has shape {self.amps.shape}, "
                f"expected ({self.layout.dimension},)"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps.copy())


def pseudo_norm(state: StateVector) -> float:
    """Sum of metric_sign(j)*|a_j|^2; conserved by metric isometries, may be
    negative or zero."""
    mag2 = state.amps.real**2 + state.amps.imag**2
    return float(np.dot(metric_vector(state.layout).astype(np.float64), mag2))


def basis_state(layout: RegisterLayout, bitstring: Sequence[int] | str) -> StateVector:
    bits = [int(b) for b in bitstring]
    if len(bits) != layout.num_bits:
        raise ValueError(f"bitstring length {len(bits)} != register size {layout.num_bits}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bitstring entries must be 0 or 1")
    index = 0
    for p, b in enumerate(bits):
        if b:
            index |= layout.bit_weight(p)
    amps = np.zeros(layout.dimension, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(layout, amps)


def observable_mask(layout: RegisterLayout) -> set[int]:
    """Basis indices with every hybit in state 0; only these survive
    hyper-postselection."""
    idx = np.arange(layout.dimension, dtype=np.uint64)
    keep = idx[(idx & np.uint64(layout.hybit_index_mask)) == 0]
    return {int(i) for i in keep}


def normalize(state: StateVector) -> StateVector:
    """Scale to pseudo-norm +1. States with pseudo-norm <= 0 are not
    physically preparable and are rejected."""
    pn = pseudo_norm(state)
    if pn <= 0.0:
        raise LqcError(f"cannot normalize state with pseudo-norm {pn:.6g}")
    return StateVector(state.layout, state.amps / np.sqrt(pn))


def encode_bits(layout: RegisterLayout, bits: Iterable[int]) -> int:
    """Basis index of a classical bit assignment (big-endian, bit 0 = MSB)."""
    index = 0
    for p, b in enumerate(bits):
        if b:
            index |= layout.bit_weight(p)
    return index


def decode_index(layout: RegisterLayout, index: int) -> tuple[int, ...]:
    """Inverse of encode_bits."""
    return tuple((index >> (layout.num_bits - 1 - p)) & 1 for p in range(layout.num_bits))
