"""Command-line interface.

Exit codes: 0 success, 1 domain violation (invalid machine, bad word,
unsupported operation, non-prime m), 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import sys

from . import machine_file
from .analysis import distinguish, find_forbidden_construction, minimize_dfa
from .closure import INTERSECT_ALPHABETS, UNION_ALPHABETS, AlphabetError, complement, intersect, union
from .compile import CompileError, compile_dfa, compile_machine, compile_mo1qfa
from .machine_file import MachineFileError
from .models import SymbolError, build_figure1_dfa, build_figure2_dfa, validate
from .semantics import (
    BranchCapExceeded,
    NonHaltingError,
    mm1qfa_run,
    mm1qfa_run_formula,
    mo1qfa_accept_prob,
    pfa_accept_prob,
    pfa_accept_prob_paths,
    qcfa_run,
    qcfa_run_branching_oracle,
    qfacl_accept_prob,
    qfacl_accept_prob_enumerate,
)
from .succinct import build_l2_mo1qfa, build_lm_qcfa, is_prime, run_lm_experiment, search_divisibility_params

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class DomainError(Exception):
    pass


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {word}s"


def _counts(a) -> str:
    return f"{_plural(a.dim, 'quantum state')}, {_plural(len(a.states), 'classical state')}"


def _load_valid(path):
    machine = machine_file.load(path)
    report = validate(machine)
    if not report.ok:
        raise DomainError(f"{path} is not a valid machine:\n{report}")
    return machine


def _load_qcfa(path):
    machine = _load_valid(path)
    if machine.kind != "qcfa":
        raise DomainError(f"{path} holds a {machine.kind}, expected a 1QCFA (compile it first)")
    return machine


def cmd_validate(args) -> int:
    machine = machine_file.load(args.path)
    report = validate(machine)
    if report.ok:
        print(f"valid {machine.kind}")
        return EXIT_OK
    print(f"invalid {machine.kind}: {len(report.violations)} violation(s)")
    for v in report.violations:
        print(f"  {v}")
    return EXIT_DOMAIN


def _evaluate(machine, word, engine: str):
    """Return (accept, reject, residual or None) for the chosen engine."""
    kind = machine.kind
    if kind == "dfa":
        acc = 1.0 if machine.accepts(word) else 0.0
        return acc, 1.0 - acc, None
    if kind == "pfa":
        acc = pfa_accept_prob(machine, word) if engine == "density" else float(pfa_accept_prob_paths(machine, word))
        return acc, 1.0 - acc, None
    if kind == "mo1qfa":
        acc = (mo1qfa_accept_prob(machine, word) if engine == "density"
               else qcfa_run_branching_oracle(compile_mo1qfa(machine), word).accept)
        return acc, 1.0 - acc, None
    if kind == "mm1qfa":
        out = mm1qfa_run(machine, word) if engine == "density" else mm1qfa_run_formula(machine, word)
        return out.accept, out.reject, out.residual
    if kind == "qfacl":
        acc = qfacl_accept_prob(machine, word) if engine == "density" else qfacl_accept_prob_enumerate(machine, word)
        return acc, 1.0 - acc, None
    out = qcfa_run(machine, word) if engine == "density" else qcfa_run_branching_oracle(machine, word)
    return out.accept, out.reject, None


def _prob(x: float) -> str:
    # round-off can leave -1e-17; print it as zero
    return f"{max(x, 0.0):.12f}"


def cmd_run(args) -> int:
    machine = _load_valid(args.path)
    word = machine.alphabet.parse(args.word)
    acc, rej, residual = _evaluate(machine, word, args.engine)
    print(f"accept {_prob(acc)}")
    print(f"reject {_prob(rej)}")
    if residual is not None:
        print(f"residual {_prob(residual)}")
    if args.oracle_check:
        other = "branch" if args.engine == "density" else "density"
        acc2, rej2, _ = _evaluate(machine, word, other)
        gap = max(abs(acc - acc2), abs(rej - rej2))
        print(f"oracle ({other}) discrepancy {gap:.3e}")
        if gap > 1e-9:
            return EXIT_DOMAIN
    return EXIT_OK


def cmd_compile(args) -> int:
    machine = _load_valid(args.path)
    try:
        out = compile_machine(machine)
    except CompileError as exc:
        raise DomainError(str(exc)) from exc
    machine_file.save(out, args.output)
    print(f"compiled {machine.kind} -> 1qcfa: {_counts(out)}")
    return EXIT_OK


def cmd_product(args) -> int:
    a, b = _load_qcfa(args.a), _load_qcfa(args.b)
    op = intersect if args.op == "intersect" else union
    try:
        out = op(a, b, alphabet_mode=args.alphabet)
    except AlphabetError as exc:
        raise DomainError(str(exc)) from exc
    machine_file.save(out, args.output)
    print(f"QS = {a.dim}*{b.dim} = {out.dim}")
    print(f"CS = {len(a.states)}*{len(b.states)} = {len(out.states)}")
    print(f"alphabet: {' '.join(out.alphabet)}")
    return EXIT_OK


def cmd_complement(args) -> int:
    a = _load_qcfa(args.path)
    out = complement(a)
    machine_file.save(out, args.output)
    print(f"QS = {out.dim}")
    print(f"CS = {len(out.states)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    d = _load_valid(args.path)
    if d.kind != "dfa":
        raise DomainError(f"analyze expects a dfa file, got {d.kind}")
    do_all = not (args.minimize or args.forbidden)
    minimal, mapping = minimize_dfa(d)
    n, k = len(d.states), len(minimal.states)
    if n == k:
        print(f"minimal: yes ({n} states)")
    else:
        print(f"minimal: no ({n} states; minimal DFA has {k})")
    if args.minimize or do_all:
        for s in d.states:
            print(f"  {s} -> {mapping.get(s, '(unreachable)')}")
        for i, s in enumerate(minimal.states):
            for t in minimal.states[i + 1:]:
                cert = distinguish(minimal, s, t)
                print(f"  distinguish {s} {t}: {''.join(cert.word) or '(empty word)'}")
    if args.forbidden or do_all:
        w = find_forbidden_construction(d)
        if w is None:
            print("forbidden construction: none")
        else:
            print(f"forbidden construction: s={w.s} t={w.t} x={''.join(w.word)}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not is_prime(args.m):
        raise DomainError("m must be prime")
    report = run_lm_experiment(args.m, args.epsilon, args.max_len, args.seed, args.random_words)
    csv_path, json_path = report.write(args.report)
    s = report.summary()
    print(f"m={s['m']} epsilon={s['epsilon']} d={s['d']} t={s['t']} K={s['K']}")
    print(f"quantum states {s['quantum_dim']}, classical states {s['classical_states']}")
    print(f"verified bound {s['error_bound']:.6g}; words {s['words_checked']}; violations {s['violations']}")
    w = s["figure1_dfa"]["forbidden_construction"]
    print(f"figure-1 DFA: {s['figure1_dfa']['states']} states, minimal {s['figure1_dfa']['minimal']}; "
          f"witness s={w['s']} t={w['t']} x={w['x']}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK if s["violations"] == 0 else EXIT_DOMAIN


def cmd_build(args) -> int:
    if args.what == "figure1":
        machine = build_figure1_dfa(args.m)
    elif args.what == "figure2":
        machine = build_figure2_dfa()
    elif args.what == "figure2-qcfa":
        machine = compile_dfa(build_figure2_dfa())
    else:
        if not is_prime(args.m):
            raise DomainError("m must be prime")
        params = search_divisibility_params(args.m, args.epsilon, args.seed)
        machine = build_l2_mo1qfa(params) if args.what == "l2" else build_lm_qcfa(args.m, args.epsilon, args.seed, params)
    machine_file.save(machine, args.output)
    print(f"wrote {machine.kind} to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcfa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a machine file")
    s.add_argument("path")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("run", help="acceptance probability of a word")
    s.add_argument("path")
    s.add_argument("word", help="input word; use '' for the empty word")
    s.add_argument("--engine", choices=["density", "branch"], default="density")
    s.add_argument("--oracle-check", action="store_true", help="also run the other engine and compare")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("compile", help="compile a dfa/pfa/mo1qfa/mm1qfa/qfacl into a 1QCFA")
    s.add_argument("path")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("product", help="intersection or union of two 1QCFA")
    s.add_argument("op", choices=["intersect", "union"])
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--alphabet", choices=[INTERSECT_ALPHABETS, UNION_ALPHABETS], default=INTERSECT_ALPHABETS)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("complement", help="swap accepting and rejecting states of a 1QCFA")
    s.add_argument("path")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_complement)

    s = sub.add_parser("analyze", help="minimize a DFA and search for the forbidden construction")
    s.add_argument("path")
    s.add_argument("--minimize", action="store_true")
    s.add_argument("--forbidden", action="store_true")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("experiment-lm", help="succinctness experiment for L_m")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--max-len", type=int, default=None, help="default 4m")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--random-words", type=int, default=200)
    s.add_argument("--report", required=True, help="output prefix for <prefix>.csv and <prefix>.json")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("build", help="write one of the built-in machines")
    s.add_argument("what", choices=["figure1", "figure2", "figure2-qcfa", "l2", "lm"])
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_build)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MachineFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, SymbolError, CompileError, NonHaltingError, BranchCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
