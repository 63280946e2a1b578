"""Command-line front end.

Exit codes: 0 success, 1 semantic failure (validation or a violated check),
2 parse or I/O failure.

Problem files are JSON documents::

    {
      "dimension": 2,
      "kraus":  [M, ...],
      "states": [{"label": "0", "vector": [[1, 0], [0, 0]]},
                 {"label": "mix", "matrix": M}],
      "povm":   [M, ...],
      "tolerances": {"tol_prob": 1e-9}
    }

where a matrix ``M`` is a list of rows and every complex entry is an
``[re, im]`` pair. ``states``, ``povm`` and ``tolerances`` are optional.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import capacity_search as cs
from .channel_zoo import ZOO_NAMES, zoo_problem
from .distinguishability import TOL_PROB, InputEnsemble, purify_ensemble
from .graph_engine import build_characteristic_graph, clique_number, export_dot, graph_power
from .quantum_core import (
    TOL_HERM,
    TOL_POVM,
    TOL_PSD,
    TOL_TRACE,
    DensityOperator,
    KrausChannel,
    Povm,
    PureState,
    ValidationError,
    hermitian_deviation,
    validate_channel,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2
KNOWN_TOLERANCES = {"tol_prob"}


class ProblemFormatError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------- parsing

def _complex(x, path: str) -> complex:
    if (not isinstance(x, list) or len(x) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in x)):
        raise ProblemFormatError(path, f"expected [re, im] number pair, got {x!r}")
    z = complex(x[0], x[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ProblemFormatError(path, "non-finite entry")
    return z


def _vector(data, path: str, dim: int) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise ProblemFormatError(path, f"expected a list of {dim} complex entries")
    return np.array([_complex(x, f"{path}[{i}]") for i, x in enumerate(data)], dtype=np.complex128)


def _matrix(data, path: str, dim: int) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise ProblemFormatError(path, f"expected {dim} rows")
    return np.vstack([_vector(row, f"{path}[{r}]", dim) for r, row in enumerate(data)])


@dataclass
class RawProblem:
    """Parsed but not yet validated contents of a problem file."""

    dimension: int
    kraus: list
    states: list  # (label, kind, array) with kind "vector" or "matrix"
    povm: list | None
    tol_prob: float = TOL_PROB


def parse_problem(doc) -> RawProblem:
    if not isinstance(doc, dict):
        raise ProblemFormatError("$", "top level must be an object")
    unknown = set(doc) - {"dimension", "kraus", "states", "povm", "tolerances", "label"}
    if unknown:
        raise ProblemFormatError("$", f"unknown fields {sorted(unknown)}")
    d = doc.get("dimension")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ProblemFormatError("dimension", f"expected a positive integer, got {d!r}")
    if not isinstance(doc.get("kraus"), list) or not doc["kraus"]:
        raise ProblemFormatError("kraus", "expected a non-empty list of matrices")
    kraus = [_matrix(m, f"kraus[{a}]", d) for a, m in enumerate(doc["kraus"])]
    states = []
    for i, s in enumerate(doc.get("states", [])):
        path = f"states[{i}]"
        if not isinstance(s, dict):
            raise ProblemFormatError(path, "expected an object with 'vector' or 'matrix'")
        label = str(s.get("label", i))
        if ("vector" in s) == ("matrix" in s):
            raise ProblemFormatError(path, "give exactly one of 'vector' or 'matrix'")
        if "vector" in s:
            states.append((label, "vector", _vector(s["vector"], f"{path}.vector", d)))
        else:
            states.append((label, "matrix", _matrix(s["matrix"], f"{path}.matrix", d)))
    povm = None
    if "povm" in doc:
        if not isinstance(doc["povm"], list) or not doc["povm"]:
            raise ProblemFormatError("povm", "expected a non-empty list of matrices")
        povm = [_matrix(m, f"povm[{j}]", d) for j, m in enumerate(doc["povm"])]
    tol_prob = TOL_PROB
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ProblemFormatError("tolerances", "expected an object")
    for key, val in tols.items():
        if key not in KNOWN_TOLERANCES:
            raise ProblemFormatError(f"tolerances.{key}", f"unknown tolerance; known: {sorted(KNOWN_TOLERANCES)}")
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not 0 <= val < 1:
            raise ProblemFormatError(f"tolerances.{key}", f"expected a number in [0, 1), got {val!r}")
        tol_prob = float(val)
    return RawProblem(d, kraus, states, povm, tol_prob)


def load_raw(path) -> RawProblem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFormatError(str(path), f"cannot read file ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno} col {exc.colno}", exc.msg) from exc
    return parse_problem(doc)


@dataclass
class Problem:
    channel: KrausChannel
    ensemble: InputEnsemble | None
    povm: Povm | None
    tol_prob: float = TOL_PROB

    def natural_pair(self):
        d = self.channel.dim
        return (self.ensemble or InputEnsemble.computational(d), self.povm or Povm.computational(d))


def build_problem(raw: RawProblem, label: str = "file") -> Problem:
    channel = KrausChannel(tuple(raw.kraus), label=label)
    ensemble = None
    if raw.states:
        states = [
            DensityOperator.from_pure(PureState(a)) if kind == "vector" else DensityOperator(a)
            for _, kind, a in raw.states
        ]
        ensemble = InputEnsemble(tuple(states), tuple(lab for lab, _, _ in raw.states))
    povm = Povm(tuple(raw.povm)) if raw.povm else None
    return Problem(channel, ensemble, povm, raw.tol_prob)


def load_problem(path) -> Problem:
    return build_problem(load_raw(path), label=Path(path).stem)


# ---------------------------------------------------------------- serialization

def complex_to_json(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def matrix_to_json(m: np.ndarray) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def problem_to_json(channel: KrausChannel, ensemble: InputEnsemble | None = None,
                    povm: Povm | None = None, tol_prob: float | None = None) -> dict:
    doc = {"dimension": channel.dim, "kraus": [matrix_to_json(e) for e in channel.operators]}
    if ensemble is not None:
        doc["states"] = [{"label": lab, "matrix": matrix_to_json(s.matrix)}
                         for lab, s in zip(ensemble.labels, ensemble.states)]
    if povm is not None:
        doc["povm"] = [matrix_to_json(m) for m in povm.elements]
    if tol_prob is not None:
        doc["tolerances"] = {"tol_prob": tol_prob}
    return doc


def estimate_record(channel: KrausChannel, est: cs.CapacityEstimate, config: cs.SearchConfig) -> dict:
    """Everything needed to re-derive the reported rate, in a stable key order."""
    return {
        "note": est.note,
        "channel": channel.label,
        "rate_bits_per_use": est.rate,
        "n_star": est.n_star,
        "K": est.K,
        "exact": est.exact,
        "omega_by_n": {str(n): k for n, k in est.omega_by_n},
        "candidate": est.candidate,
        "certificate": {
            "vertices": list(est.certificate.vertices),
            "words": [list(w) for w in est.words],
            "word_labels": est.word_labels(),
        },
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(config).items()},
        "problem": problem_to_json(channel, est.ensemble, est.povm, config.tol_prob),
    }


def dump_json(doc) -> str:
    # repr-based float output is shortest round-trip exact
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_estimate_record(path):
    """Return ``(problem, n_max, rate)`` from a capacity JSON record."""
    doc = json.loads(Path(path).read_text())
    raw = parse_problem(doc["problem"])
    return build_problem(raw, label=doc.get("channel", "record")), doc["config"]["n_max"], doc["rate_bits_per_use"]


# ---------------------------------------------------------------- commands

def _say(msg: str = "") -> None:
    print(msg)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _resolve(args) -> Problem:
    if getattr(args, "channel", None):
        ch, ens, povm = zoo_problem(args.channel)
        return Problem(ch, ens, povm)
    if not getattr(args, "file", None):
        raise ProblemFormatError("arguments", "give a problem FILE or --channel NAME")
    return load_problem(args.file)


def _tol_prob(args, problem: Problem) -> float:
    return args.tol_prob if getattr(args, "tol_prob", None) is not None else problem.tol_prob


def cmd_validate(args) -> int:
    raw = load_raw(args.file)
    failed = []
    rep = validate_channel(raw.kraus)
    _say(f"channel: {rep.n_operators} Kraus operators, completeness deviation "
         f"max|sum E^dag E - 1| = {rep.deviation:.3e} (tol {rep.tolerance:g}) "
         f"{'ok' if rep.passed else 'FAIL'}")
    if not rep.passed:
        failed.append("completeness check")
    for i, (label, kind, a) in enumerate(raw.states):
        if kind == "vector":
            dev = abs(float(np.linalg.norm(a)) - 1)
            ok = dev <= TOL_TRACE
            _say(f"state {i} ({label}): norm deviation {dev:.3e} {'ok' if ok else 'FAIL'}")
        else:
            herm = hermitian_deviation(a)
            tr = abs(np.trace(a).real - 1)
            lo = float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
            ok = herm <= TOL_HERM and tr <= TOL_TRACE and lo >= -TOL_PSD
            _say(f"state {i} ({label}): hermiticity {herm:.3e}, trace deviation {tr:.3e}, "
                 f"min eigenvalue {lo:.3e} {'ok' if ok else 'FAIL'}")
        if not ok:
            failed.append(f"state {i}")
    if raw.povm is not None:
        dev = float(np.max(np.abs(sum(raw.povm) - np.eye(raw.dimension))))
        worst = min(float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0]) for m in raw.povm)
        herm = max(hermitian_deviation(m) for m in raw.povm)
        ok = dev <= TOL_POVM and worst >= -TOL_PSD and herm <= TOL_HERM
        _say(f"povm: {len(raw.povm)} elements, sum deviation {dev:.3e}, hermiticity {herm:.3e}, "
             f"min eigenvalue {worst:.3e} {'ok' if ok else 'FAIL'}")
        if not ok:
            failed.append("povm")
    if failed:
        _say(f"INVALID: {', '.join(failed)}")
        return EXIT_FAIL
    _say("valid")
    return EXIT_OK


def _power_path(dot: Path, n: int) -> Path:
    return dot.with_name(f"{dot.stem}.n{n}{dot.suffix or '.dot'}")


def cmd_graph(args) -> int:
    problem = _resolve(args)
    ens, povm = problem.natural_pair()
    g = build_characteristic_graph(problem.channel, ens, povm, _tol_prob(args, problem))
    if args.dot:
        Path(args.dot).write_text(export_dot(g))
    if not g.edges:
        _say("graph has no edges; zero-error rate 0 at all n")
        return EXIT_OK
    _say(f"vertices: {g.vertex_count}, edges: {len(g.edges)}")
    for n in sorted({1, args.n}):
        gn = graph_power(g, n)
        cert = clique_number(gn, args.budget)
        flag = "" if cert.exact else " (lower bound only: search budget exhausted)"
        _say(f"omega(G^{n}) = {cert.size}{flag}")
        _say("  certificate: " + ", ".join(gn.vertex_labels[v] for v in cert.vertices))
        if args.dot and n > 1:
            Path(_power_path(Path(args.dot), n)).write_text(export_dot(gn, f"G^{n}"))
    return EXIT_OK


def _config(args) -> cs.SearchConfig:
    return cs.SearchConfig(
        n_max=args.nmax, seed=args.seed, random_bases=args.random_bases, augment=args.augment,
        tol_prob=args.tol_prob if args.tol_prob is not None else TOL_PROB, budget=args.budget,
    )


def cmd_capacity(args) -> int:
    problem = _resolve(args)
    if args.tol_prob is None:
        args.tol_prob = problem.tol_prob
    config = _config(args)
    extra = []
    if problem.ensemble is not None:
        extra.append((problem.ensemble, problem.povm or Povm.computational(problem.channel.dim)))
    est = cs.estimate_capacity(problem.channel, config, extra)
    _say(f"channel: {problem.channel.label}")
    _say(f"rate: {est.rate:.6f} bits/use ({est.note})")
    _say(f"n_star: {est.n_star}  K: {est.K}  exact: {est.exact}  candidate: {est.candidate}")
    _say("omega by n: " + ", ".join(f"n={n}: {k}" for n, k in est.omega_by_n))
    _say("codewords: " + ", ".join(est.word_labels()))
    if args.json:
        Path(args.json).write_text(dump_json(estimate_record(problem.channel, est, config)))
    return EXIT_OK


def cmd_verify(args) -> int:
    prop = args.prop
    if prop == 1:
        problem = _resolve(args) if (args.channel or args.file) else Problem(*zoo_problem("pentagon"))
        ens, povm = problem.natural_pair()
        rep = cs.verify_proposition_1(problem.channel, ens, povm)
        _say(f"edges: {rep.edges}, one-shot rate: {rep.rate_n1:.6f}, positive capacity witnessed: {rep.holds}")
        _say(f"violations: {0 if rep.consistent else 1}")
        return EXIT_OK if rep.consistent else EXIT_FAIL
    if prop == 3:
        zoo = (args.channel,) if args.channel else cs.PROP3_ZOO
        results = cs.run_proposition_3_suite(args.trials or 100, args.seed, zoo)
        bad = [(name, r) for name, r in results if not r.holds]
        e0 = sum(r.edges_original for _, r in results)
        e1 = sum(r.edges_purified for _, r in results)
        _say(f"ensembles tested: {len(results)}; edges before purification: {e0}, after: {e1}")
        _say(f"violations: {len(bad)}")
        for name, r in bad:
            _say(f"  {name}: {r}")
        return EXIT_FAIL if bad else EXIT_OK
    channel = _resolve(args).channel if (args.channel or args.file) else None
    if prop == 2:
        rep = cs.verify_proposition_2(channel, args.trials or 100, args.seed)
    else:
        rep = cs.verify_proposition_4(channel, args.trials or 200, args.seed)
    _say(f"pairs tested: {rep.pairs_tested}; non-adjacent pairs found: {rep.non_adjacent_pairs}; "
         f"max |overlap| of non-adjacent pure pairs: {rep.max_overlap:.3e}")
    _say(f"violations: {len(rep.violations)}")
    for v in rep.violations:
        _say(f"  {v}")
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qzec", description="Zero-error rates of finite-dimensional quantum channels.")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp, file_required=False):
        if file_required:
            sp.add_argument("file", help="problem file (JSON)")
        else:
            sp.add_argument("file", nargs="?", help="problem file (JSON)")
            sp.add_argument("--channel", help=f"zoo channel instead of a file: {', '.join(ZOO_NAMES)}")
        sp.add_argument("--tol-prob", type=float, default=None, help="probability treated as zero (default 1e-9)")

    sp = sub.add_parser("validate", help="check channel, states and POVM invariants")
    source(sp, file_required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("graph", help="characteristic graph, its powers and clique numbers")
    source(sp)
    sp.add_argument("--dot", help="write the graph in DOT format here (power goes to <stem>.n<N>.dot)")
    sp.add_argument("--n", type=int, default=1, help="also analyse the N-th disjunctive power")
    sp.add_argument("--budget", type=int, default=cs.DEFAULT_BUDGET, help="clique search node limit")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("capacity", help="certified lower bound on the zero-error capacity")
    source(sp)
    sp.add_argument("--nmax", type=int, default=2, help="largest block length (default 2)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--random-bases", type=int, default=4, help="number of random input bases to try")
    sp.add_argument("--augment", action="store_true", help="try adding non-orthogonal states to the best set")
    sp.add_argument("--budget", type=int, default=cs.DEFAULT_BUDGET, help="clique search node limit")
    sp.add_argument("--json", help="write the full result record here")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("verify", help="randomized checks of the structural propositions")
    source(sp)
    sp.add_argument("--prop", type=int, choices=(1, 2, 3, 4), required=True)
    sp.add_argument("--trials", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        _err(str(exc))
        return EXIT_PARSE
    except KeyError as exc:
        _err(str(exc.args[0]) if exc.args else "unknown name")
        return EXIT_PARSE
    except ValidationError as exc:
        _err(f"validation failed: {exc}")
        return EXIT_FAIL
    except ValueError as exc:
        _err(str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
