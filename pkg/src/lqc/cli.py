"""Command line front end: run, sample, verify, synth, search, approx."""

from __future__ import annotations

import os

# cap BLAS pools before numpy can spin them up
_cap = os.environ.get("LQC_THREADS")
if _cap:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _cap)

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Circuit, ParseError, parse, serialize, to_matrix
from .core import (
    EPS_ISO,
    BitKind,
    GuardError,
    IsometryError,
    LqcError,
    RegisterLayout,
    basis_state,
    metric_vector,
)
from .gates import MatrixTextError, isometry_residual, parse_matrix_text
from .search import MAX_K_CHI, SearchSpec, choose_k, predicted_success, run_search
from .simulator import (
    ZeroObservableMassError,
    format_distribution,
    observe,
    run,
    sample,
)
from .synthesis import compile as synth_compile
from .synthesis import format_report, projective_distance, word_search

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NO_MASS = 2
EXIT_ISOMETRY = 3
EXIT_GUARD = 4

MAX_AMPLITUDES = 2**24
MAX_SEARCH_QUBITS = 24


@dataclass
class RunReport:
    """Per-invocation accounting, printed on stderr so stdout stays a clean
    machine-readable distribution."""

    circuit_path: str
    instruction_count: int
    wall_time_s: float
    observable_mass: float
    distribution: str

    def format(self) -> str:
        return (
            f"circuit = {self.circuit_path}\n"
            f"instructions = {self.instruction_count}\n"
            f"wall_time_s = {self.wall_time_s:.17g}\n"
            f"observable_mass = {self.observable_mass:.17g}\n"
            f"distribution = {self.distribution}\n"
        )


class CliUsageError(LqcError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default error path exits with status 2, which this tool
    # reserves for zero observable mass
    def error(self, message: str):
        raise CliUsageError(message)


def _read(path: str) -> str:
    return Path(path).read_text()


def _check_memory(layout: RegisterLayout) -> None:
    if layout.dimension > MAX_AMPLITUDES:
        raise GuardError(
            f"register of {layout.num_bits} bits needs {layout.dimension} "
            f"amplitudes; the guard is 2^24"
        )


def _parse_bits(text: str, want: int) -> list[int]:
    if len(text) != want or set(text) - {"0", "1"}:
        raise CliUsageError(
            f"initial bitstring must be {want} characters of 0/1, got {text!r}"
        )
    return [int(b) for b in text]


def _parse_circuit(path: str) -> Circuit:
    circuit = parse(_read(path))
    _check_memory(circuit.layout)
    return circuit


def cmd_run(args: argparse.Namespace) -> int:
    circuit = _parse_circuit(args.file)
    initial = None
    if args.init is not None:
        initial = basis_state(
            circuit.layout, _parse_bits(args.init, circuit.layout.num_bits)
        )
    t0 = time.perf_counter()
    state = run(circuit, initial)
    dist = observe(state)
    wall = time.perf_counter() - t0
    report = RunReport(
        args.file, len(circuit.instructions), wall, dist.observable_mass, "inline"
    )
    sys.stderr.write(report.format())
    sys.stdout.write(format_distribution(dist))
    return EXIT_NO_MASS if dist.observable_mass == 0.0 else EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    circuit = _parse_circuit(args.file)
    state = run(circuit)
    result = sample(state, args.shots, args.seed)
    for key in sorted(result.counts):
        sys.stdout.write(f"{key}\t{result.counts[key]}\n")
    return EXIT_OK


def _looks_like_matrix(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line.split()[0].lower() == "dim"
    return False


def cmd_verify(args: argparse.Namespace) -> int:
    text = _read(args.file)
    if _looks_like_matrix(text):
        G, (m, n) = parse_matrix_text(text)
        if args.metric is not None:
            m, n = args.metric
            if m < 0 or n < 0 or m + n != G.shape[0]:
                raise CliUsageError(
                    f"--metric {m} {n} does not fit a {G.shape[0]}-dimensional matrix"
                )
        eta = np.array([1.0] * m + [-1.0] * n)
    else:
        circuit = parse(text)
        _check_memory(circuit.layout)
        G = to_matrix(circuit)
        eta = metric_vector(circuit.layout).astype(float)
    residual = isometry_residual(G, eta)
    ok = residual <= EPS_ISO
    sys.stdout.write(f"residual = {residual:.17g}\n")
    sys.stdout.write("PASS\n" if ok else "FAIL\n")
    return EXIT_OK if ok else EXIT_ISOMETRY


def cmd_synth(args: argparse.Namespace) -> int:
    A, (m, n) = parse_matrix_text(_read(args.file))
    if args.qubits < 0 or args.hybits < 0 or args.qubits + args.hybits == 0:
        raise CliUsageError("need a register with at least one bit")
    layout = RegisterLayout("q" * args.qubits + "h" * args.hybits)
    _check_memory(layout)
    signs = metric_vector(layout)
    plus, minus = int(np.sum(signs > 0)), int(np.sum(signs < 0))
    if (m, n) != (plus, minus):
        raise CliUsageError(
            f"matrix signature ({m},{n}) does not match the "
            f"{args.qubits}-qubit {args.hybits}-hybit register ({plus},{minus})"
        )
    tol = args.approx if args.approx is not None else None
    result = synth_compile(A, layout, tol=tol)
    R = to_matrix(result.circuit)
    if tol is None:
        resim = float(np.max(np.abs(R - A)))
    else:
        resim = projective_distance(A, R)
    sys.stdout.write(serialize(result.circuit))
    sys.stderr.write(format_report(result))
    sys.stderr.write(f"reconstruction_error = {resim:.17g}\n")
    if tol is not None:
        sys.stderr.write(f"budget_met = {'true' if result.budget_met else 'false'}\n")
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    if args.n < 1 or args.n > MAX_SEARCH_QUBITS:
        raise GuardError(f"search register must have 1..{MAX_SEARCH_QUBITS} qubits")
    N = 2**args.n
    if args.k is not None:
        k = args.k
        if k * args.chi > MAX_K_CHI:
            raise GuardError(
                f"k*chi = {k * args.chi:g} exceeds {MAX_K_CHI:g}; cosh overflows"
            )
    else:
        p_min = args.pmin if args.pmin is not None else 0.99
        k = choose_k(N, args.chi, p_min)
    spec = SearchSpec(args.n, args.x, args.chi, k)
    predicted = predicted_success(N, args.chi, k)
    dist = run_search(spec)
    simulated = dist.probabilities.get(args.x, 0.0)
    sys.stdout.write(f"k = {k}\n")
    sys.stdout.write(f"predicted_success = {predicted:.17g}\n")
    sys.stdout.write(f"simulated = {simulated:.17g}\n")
    sys.stdout.write(f"difference = {simulated - predicted:.17g}\n")
    return EXIT_OK


def cmd_approx(args: argparse.Namespace) -> int:
    M, _ = parse_matrix_text(_read(args.file))
    if M.shape != (2, 2):
        raise CliUsageError("approx target must be a 2x2 matrix")
    kind = BitKind.QUBIT if args.kind == "qubit" else BitKind.HYBIT
    word = word_search(M, kind, args.tol, args.depth)
    sys.stdout.write(f"word = {word}\n")
    sys.stdout.write(f"projective_error = {word.error:.17g}\n")
    sys.stdout.write(f"tol_met = {'true' if word.tol_met else 'false'}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a circuit and print the distribution")
    p.add_argument("file")
    p.add_argument("--init", metavar="BITS", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sample", help="draw measurement shots")
    p.add_argument("file")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="check a matrix or circuit preserves the metric")
    p.add_argument("file")
    p.add_argument("--metric", nargs=2, type=int, metavar=("m", "n"), default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synth", help="compile a matrix into a circuit")
    p.add_argument("file")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--hybits", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--approx", type=float, metavar="TOL", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("search", help="amplified database search demo")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", required=True, metavar="BITS")
    p.add_argument("--chi", type=float, default=0.5)
    rounds = p.add_mutually_exclusive_group()
    rounds.add_argument("--k", type=int, default=None)
    rounds.add_argument("--pmin", type=float, default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("approx", help="single-bit generator-word approximation")
    p.add_argument("file")
    p.add_argument("--kind", choices=("qubit", "hybit"), required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_approx)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliUsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_PARSE
    except ParseError as e:
        for d in e.diagnostics:
            sys.stderr.write(f"error: {d}\n")
        return EXIT_PARSE
    except (MatrixTextError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_PARSE
    except ZeroObservableMassError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NO_MASS
    except IsometryError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ISOMETRY
    except GuardError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_GUARD
    except LqcError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
