"""Two-level factorization of register isometries and lowering to circuits.

A two-level matrix b_{i,j}(V) acts as the 2x2 block V on basis indices i, j
and as the identity elsewhere. Any register isometry factors into such
matrices by column elimination: Givens rotations clear each column within
the positive-metric and negative-metric index blocks, one U(1,1) element
clears the remaining cross-block entry, and leftover diagonal phases are
absorbed into the factors.

Lowering a factor to gates splits on the Hamming distance between i and j.
Distance 1 is a multi-controlled single-bit gate directly. Larger distances
route through an intermediate index k one bit-flip from i: conjugating by
b_{j,k}(sigma_x) relabels k to j whenever sigma_x is legal on the (j,k)
pair, i.e. when the two indices carry equal metric signs. When i and j have
equal signs but differ only in hybit bits no such k exists with a sign
matching both, and the four-matrix identity for metric (+,+,-) is used
instead, whose factors are U(1,1) elements on the (i,k) and (j,k) pairs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..core import (
    EPS_ISO,
    EPS_RECON,
    BitKind,
    IsometryError,
    LqcError,
    RegisterLayout,
    metric_sign,
)
from ..gates import builtin, is_isometry, isometry_residual
from ..circuit import Circuit, Instruction
from .gadgets import _Emitter, isometric_sqrt

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class TwoLevelFactor:
    """b_{i,j}(V): V on the span of basis indices i < j, identity elsewhere.

    The first row/column of V belongs to index i. metric_pair holds the
    register metric signs (eta_ii, eta_jj)."""

    i: int
    j: int
    V: np.ndarray = field(repr=False)
    metric_pair: tuple[int, int]

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise LqcError(f"need 0 <= i < j, got ({self.i}, {self.j})")
        V = np.asarray(self.V, dtype=complex)
        object.__setattr__(self, "V", V)
        if V.shape != (2, 2):
            raise LqcError("two-level block must be 2x2")
        eta = np.array(self.metric_pair, dtype=float)
        if abs(eta[0]) != 1 or abs(eta[1]) != 1:
            raise LqcError("metric_pair entries must be +-1")
        resid = isometry_residual(V, eta)
        if resid > 1e-8:
            raise IsometryError(
                f"two-level block violates its pair metric (residual {resid:.3g})"
            )


def embed(factor: TwoLevelFactor, dim: int) -> np.ndarray:
    """Dense ambient matrix of a two-level factor."""
    if factor.j >= dim:
        raise LqcError(f"factor indices ({factor.i},{factor.j}) exceed dimension {dim}")
    out = np.eye(dim, dtype=complex)
    ij = (factor.i, factor.j)
    out[np.ix_(ij, ij)] = factor.V
    return out


def _metric_signs(metric, dim: int) -> np.ndarray:
    if isinstance(metric, tuple) and len(metric) == 2 and all(
        isinstance(x, (int, np.integer)) for x in metric
    ):
        m, n = metric
        if m + n != dim:
            raise LqcError(f"metric ({m},{n}) does not match dimension {dim}")
        return np.concatenate([np.ones(m), -np.ones(n)])
    s = np.asarray(metric, dtype=float)
    if s.ndim == 2:
        s = np.diagonal(s)
    if s.shape != (dim,) or not np.all(np.abs(s) == 1):
        raise LqcError("metric must be (m, n) or a +-1 sign vector of full length")
    return s


def _pair_inverse(M: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # inverse of an isometry through its metric: M^-1 = eta M^dagger eta
    return (eta[:, None] * M.conj().T) * eta[None, :]


def two_level_factorize(A: np.ndarray, metric) -> list[TwoLevelFactor]:
    """Ordered factors with A = F_1 @ F_2 @ ... @ F_t within EPS_RECON.

    metric is either a block signature (m, n) or a per-index sign vector,
    so interleaved register metrics work directly. Factor count is at most
    d(d-1)/2.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise LqcError("input must be a square matrix")
    d = A.shape[0]
    s = _metric_signs(metric, d)
    ok, resid = is_isometry(A, s)
    if not ok:
        raise IsometryError(f"input is not an isometry (residual {resid:.3g})")
    if d == 1:
        if abs(A[0, 0] - 1) > 1e-12:
            raise LqcError("dimension-1 input must be the identity scalar")
        return []

    work = A.copy()
    ops: list[tuple[int, int, np.ndarray]] = []  # (x, y, M): work <- b_{x,y}(M) work

    def apply_left(x: int, y: int, M: np.ndarray) -> None:
        work[[x, y], :] = M @ work[[x, y], :]
        ops.append((x, y, M))

    for c in range(d):
        active = [r for r in range(c + 1, d) if abs(work[r, c]) > 1e-14]
        pos = [r for r in active if s[r] > 0]
        neg = [r for r in active if s[r] < 0]
        p_pivot = c if s[c] > 0 else (pos[0] if pos else None)
        n_pivot = c if s[c] < 0 else (neg[0] if neg else None)

        for r in pos:
            if r == p_pivot:
                continue
            vp, vi = work[p_pivot, c], work[r, c]
            rr = np.sqrt(abs(vp) ** 2 + abs(vi) ** 2)
            M = np.array([[np.conj(vp), np.conj(vi)], [-vi, vp]]) / rr
            apply_left(p_pivot, r, M)
        for r in neg:
            if r == n_pivot:
                continue
            vp, vi = work[n_pivot, c], work[r, c]
            rr = np.sqrt(abs(vp) ** 2 + abs(vi) ** 2)
            M = np.array([[np.conj(vp), np.conj(vi)], [-vi, vp]]) / rr
            apply_left(n_pivot, r, M)

        cross_p = p_pivot is not None and abs(work[p_pivot, c]) > 1e-14
        cross_n = n_pivot is not None and abs(work[n_pivot, c]) > 1e-14
        if cross_p and cross_n:
            vp, vn = work[p_pivot, c], work[n_pivot, c]
            if s[c] > 0:
                r2 = abs(vp) ** 2 - abs(vn) ** 2
                if r2 <= 1e-12:
                    raise LqcError("numerical breakdown in cross-block elimination")
                rr = np.sqrt(r2)
                M = np.array([[np.conj(vp), -np.conj(vn)], [-vn, vp]]) / rr
            else:
                r2 = abs(vn) ** 2 - abs(vp) ** 2
                if r2 <= 1e-12:
                    raise LqcError("numerical breakdown in cross-block elimination")
                rr = np.sqrt(r2)
                M = np.array([[vn, -vp], [-np.conj(vp), np.conj(vn)]]) / rr
            apply_left(p_pivot, n_pivot, M)

    # invert the recorded eliminations: A = inv(op_1) ... inv(op_t) D
    raw: list[tuple[int, int, np.ndarray]] = []
    for x, y, M in ops:
        eta = np.array([s[x], s[y]])
        raw.append((x, y, _pair_inverse(M, eta)))

    # absorb the diagonal residue into the rightmost factor touching each
    # index; a genuinely untouched index gets a fresh diagonal factor paired
    # with its low-bit neighbor
    for c in range(d):
        ph = work[c, c]
        if abs(ph - 1) <= 1e-13:
            continue
        hit = None
        for t in range(len(raw) - 1, -1, -1):
            if c in (raw[t][0], raw[t][1]):
                hit = t
                break
        if hit is not None:
            x, y, M = raw[hit]
            slot = 0 if x == c else 1
            M = M.copy()
            M[:, slot] *= ph
            raw[hit] = (x, y, M)
        else:
            partner = c ^ 1
            if partner >= d:
                raise LqcError("cannot absorb phase: no pairing index")
            M = np.diag([ph, 1.0]) if c < partner else np.diag([1.0, ph])
            raw.append((min(c, partner), max(c, partner), M.astype(complex)))

    factors = []
    for x, y, M in raw:
        if x > y:
            x, y = y, x
            M = _SIGMA_X @ M @ _SIGMA_X
        factors.append(TwoLevelFactor(x, y, M, (int(s[x]), int(s[y]))))

    recon = np.eye(d, dtype=complex)
    for f in factors:
        recon = recon @ embed(f, d)
    err = float(np.max(np.abs(recon - A)))
    if err > EPS_RECON:
        raise LqcError(f"factorization reconstruction error {err:.3g}")
    return factors


# ---------------------------------------------------------------------------
# Lowering to multi-controlled instructions


def _pattern_instructions(
    em: _Emitter, pattern: dict[int, int], target: int, W: np.ndarray
) -> list[Instruction]:
    """Instructions for W on `target` exactly when each pattern position
    holds its stated bit. Zero-valued positions expand by inclusion-
    exclusion over alternating powers of W; with no zeros this is a single
    instruction."""
    ones = sorted(p for p, v in pattern.items() if v == 1)
    zeros = sorted(p for p, v in pattern.items() if v == 0)
    kind = em.layout.kinds[target]
    eta = kind.metric_diag()
    W_inv = _pair_inverse(W, eta)
    out: list[Instruction] = []
    for size in range(len(zeros) + 1):
        for S in itertools.combinations(zeros, size):
            gate = W if size % 2 == 0 else W_inv
            out += em.emit(ones + list(S), target, gate)
    return out


def controlled_on_pattern(
    layout: RegisterLayout, pattern: dict[int, int], target: int, W: np.ndarray
) -> Circuit:
    """Standalone circuit for a pattern-controlled single-bit gate."""
    if target in pattern:
        raise LqcError("target cannot be part of the control pattern")
    em = _Emitter(layout)
    instrs = _pattern_instructions(em, dict(pattern), target, np.asarray(W, complex))
    return Circuit(layout, tuple(instrs), em.defs)


def _bit_at(layout: RegisterLayout, index: int, pos: int) -> int:
    return (index >> (layout.num_bits - 1 - pos)) & 1


def _direct_pair(em: _Emitter, x: int, y: int, W: np.ndarray) -> list[Instruction]:
    """b_{x,y}(W) for Hamming-distance-1 indices; W's first slot belongs
    to x. Emits the pattern-controlled instruction(s)."""
    layout = em.layout
    diff = x ^ y
    p = layout.num_bits - diff.bit_length()  # position of the single set bit
    if _bit_at(layout, x, p) == 1:
        W = _SIGMA_X @ W @ _SIGMA_X
    pattern = {
        q: _bit_at(layout, x, q) for q in range(layout.num_bits) if q != p
    }
    return _pattern_instructions(em, pattern, p, W)


def _basis_phase(em: _Emitter, index: int, phase: complex) -> list[Instruction]:
    """Multiply basis state |index> by a unit phase."""
    if abs(phase - 1) <= 1e-14:
        return []
    layout = em.layout
    nbits = layout.num_bits
    ones = [q for q in range(nbits) if _bit_at(layout, index, q) == 1]
    if ones:
        target = ones[0]
        gate = np.diag([1.0, phase]).astype(complex)
    else:
        target = nbits - 1
        gate = np.diag([phase, 1.0]).astype(complex)
    pattern = {q: _bit_at(layout, index, q) for q in range(nbits) if q != target}
    return _pattern_instructions(em, pattern, target, gate)


def _first_diff_of_kind(layout: RegisterLayout, diff_positions, kind: BitKind):
    for q in diff_positions:
        if layout.kinds[q] is kind:
            return q
    return None


def _lower_factor(em: _Emitter, i: int, j: int, V: np.ndarray) -> list[Instruction]:
    layout = em.layout
    nbits = layout.num_bits

    if abs(V[0, 1]) < 1e-14 and abs(V[1, 0]) < 1e-14:
        return _basis_phase(em, i, V[0, 0]) + _basis_phase(em, j, V[1, 1])

    diffs = [q for q in range(nbits) if _bit_at(layout, i, q) != _bit_at(layout, j, q)]
    h = len(diffs)
    if h == 1:
        return _direct_pair(em, i, j, V)

    si, sj = metric_sign(layout, i), metric_sign(layout, j)

    def conjugated(k: int) -> list[Instruction]:
        # b_{i,j}(V) = b_{j,k}(X) b_{i,k}(V) b_{j,k}(X)
        a, b = min(j, k), max(j, k)
        t_part = _lower_factor(em, a, b, _SIGMA_X)
        if (i ^ k).bit_count() == 1:
            mid = _direct_pair(em, i, k, V)
        else:
            a2, b2 = min(i, k), max(i, k)
            W = V if i < k else _SIGMA_X @ V @ _SIGMA_X
            mid = _lower_factor(em, a2, b2, W)
        return t_part + mid + t_part

    if si != sj:
        # a differing hybit always exists here and flipping it matches k's
        # sign to j, making sigma_x legal on the (j, k) pair
        q = _first_diff_of_kind(layout, diffs, BitKind.HYBIT)
        return conjugated(i ^ (1 << (nbits - 1 - q)))

    q = _first_diff_of_kind(layout, diffs, BitKind.QUBIT)
    if q is not None:
        return conjugated(i ^ (1 << (nbits - 1 - q)))

    # equal signs, all differing bits are hybits (h even)
    if h > 2:
        w1 = 1 << (nbits - 1 - diffs[0])
        w2 = 1 << (nbits - 1 - diffs[1])
        return conjugated(i ^ w1 ^ w2)

    # h = 2: the metric (+,+,-) four-matrix identity through k = i with one
    # differing hybit flipped
    det = V[0, 0] * V[1, 1] - V[0, 1] * V[1, 0]
    delta = np.angle(det) / 2.0
    V0 = np.exp(-1j * delta) * V
    out = _basis_phase(em, i, np.exp(1j * delta)) + _basis_phase(em, j, np.exp(1j * delta))
    zeta = V0[0, 0]
    if abs(zeta) < 1e-6:
        # the identity divides by zeta; take two square-root passes instead
        R = isometric_sqrt(V0)
        half = _lower_factor(em, i, j, R)
        return out + half + half
    gamma = V0[0, 1]
    g = np.sqrt(1.0 + abs(gamma) ** 2)
    k = i ^ (1 << (nbits - 1 - diffs[0]))
    zc = np.conj(zeta)
    gc = np.conj(gamma)
    s2 = np.sqrt(2.0)
    M1 = np.array([[g / zc, -s2 * gamma / zc], [-s2 * gc / zeta, g / zeta]])
    M2 = np.array([[s2, -1.0], [-1.0, s2]], dtype=complex)
    M3 = np.array([[g, gamma], [gc, g]])
    M4 = np.array([[s2 / zeta, g / zc], [g / zeta, s2 / zc]])
    out += _direct_pair(em, j, k, M4)
    out += _direct_pair(em, i, k, M3)
    out += _direct_pair(em, j, k, M2)
    out += _direct_pair(em, i, k, M1)
    return out


def two_level_to_circuit(factor: TwoLevelFactor, layout: RegisterLayout) -> Circuit:
    """Circuit of multi-controlled single-bit gates realizing one embedded
    two-level factor on the given register."""
    if factor.j >= layout.dimension:
        raise LqcError(
            f"factor on indices ({factor.i},{factor.j}) does not fit a "
            f"{layout.num_bits}-bit register"
        )
    want = (metric_sign(layout, factor.i), metric_sign(layout, factor.j))
    if want != tuple(factor.metric_pair):
        raise LqcError(
            f"factor metric pair {factor.metric_pair} does not match the "
            f"register metric {want} at its indices"
        )
    em = _Emitter(layout)
    instrs = _lower_factor(em, factor.i, factor.j, factor.V)
    return Circuit(layout, tuple(instrs), em.defs)
