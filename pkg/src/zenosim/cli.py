"""Command-line front end.

Subcommands: simulate, cnot, census, sweep, montecarlo, oracle-check.
Programs travel as JSON circuit files (version "1"); results are JSON or
CSV on stdout with all floats at 12 significant digits.  Identical
invocations produce byte-identical output.  Exit codes: 0 success, 2 a
heralded failure or failed verification, 1 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, circuits, oracle
from .circuits import CircuitProgram, Instruction
from .gates import ImperfectionProfile
from .interrogation import PI_OVER_2N, PI_OVER_N, QiParams
from .state import particle, photon

ORACLE_TOLERANCE = 1e-10

_THETA_FLAG = {"pi-over-n": PI_OVER_N, "pi-over-2n": PI_OVER_2N}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this artifact reserves 2 for heralded
    failures, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class CircuitFileError(ValueError):
    pass


# ---------------------------------------------------------------------------
# circuit file round-trip

def program_to_doc(program: CircuitProgram) -> dict:
    subsystems = []
    for spec in program.subsystems:
        entry = {"name": spec.name, "kind": spec.kind}
        if spec.kind == "particle":
            entry["dim"] = spec.positions()
        subsystems.append(entry)
    instructions = []
    for instr in program.instructions:
        entry = {"op": instr.op}
        for key, value in instr.args.items():
            entry[key] = _plain(value)
        instructions.append(entry)
    return {"version": "1", "subsystems": subsystems,
            "bits": list(program.bits), "instructions": instructions}


def _plain(value):
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def program_from_doc(doc) -> CircuitProgram:
    if not isinstance(doc, dict):
        raise CircuitFileError("top level must be an object")
    if doc.get("version") != "1":
        raise CircuitFileError(f"unsupported version {doc.get('version')!r}")
    subsystems = []
    for i, entry in enumerate(doc.get("subsystems", [])):
        kind = entry.get("kind")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise CircuitFileError(f"subsystems[{i}]: missing name")
        if kind == "photon":
            subsystems.append(photon(name))
        elif kind == "particle":
            subsystems.append(particle(name, positions=int(entry.get("dim", 2))))
        else:
            raise CircuitFileError(f"subsystems[{i}]: unknown kind {kind!r}")
    bits = doc.get("bits", [])
    instructions = []
    for i, entry in enumerate(doc.get("instructions", [])):
        if not isinstance(entry, dict) or "op" not in entry:
            raise CircuitFileError(f"instructions[{i}]: missing op")
        op = entry["op"]
        if op not in circuits.VALID_OPS:
            raise CircuitFileError(f"instructions[{i}]: unknown op {op!r}")
        args = {k: v for k, v in entry.items() if k != "op"}
        instructions.append(Instruction(op, args))
    try:
        return CircuitProgram(tuple(subsystems), tuple(bits),
                              tuple(instructions))
    except ValueError as exc:
        raise CircuitFileError(str(exc)) from exc


def load_program(path: str) -> CircuitProgram:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CircuitFileError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CircuitFileError(
            f"parse error at line {exc.lineno} column {exc.colno}") from exc
    return program_from_doc(doc)


def serialize_program(program: CircuitProgram) -> str:
    # full-precision floats so parse -> serialize -> parse is the identity
    return json.dumps(program_to_doc(program), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# result emitters

def _emit_json(value) -> str:
    if isinstance(value, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_emit_json(v)}"
                         for k, v in sorted(value.items()))
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_emit_json(v) for v in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (np.floating, float)):
        return format(float(value), ".12g")
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    if value is None:
        return "null"
    return json.dumps(value)


def _num(x) -> str:
    if isinstance(x, (np.floating, float)):
        return format(float(x), ".12g")
    return str(x)


def _csv_line(values) -> str:
    return ",".join(_num(v) for v in values)


def _result_payload(result: circuits.RunResult) -> dict:
    state = result.final_state
    return {
        "classical": dict(result.classical),
        "failed": result.failed,
        "branch_weight": result.branch_weight,
        "success_probability": result.success_probability,
        "state": {
            "subsystems": [s.name for s in state.layout],
            "dims": [s.dim for s in state.layout],
            "amplitudes": [[float(a.real), float(a.imag)]
                           for a in state.amps.reshape(-1)],
        },
    }


# ---------------------------------------------------------------------------
# argument helpers

def _parse_profile(text: str) -> ImperfectionProfile:
    parts = text.split(",")
    if len(parts) != 5:
        raise ValueError("profile needs five comma-separated values: p,q,r,s,eta")
    p, q, r, s, eta = (float(x) for x in parts)
    return ImperfectionProfile(p=p, q=q, r=r, s=s, eta=eta)


def _parse_cycles_list(text: str) -> list[int]:
    values = [int(x) for x in text.split(",") if x]
    if not values or any(v < 1 for v in values):
        raise ValueError("cycle counts must be positive integers")
    return values


def _resolve_family(name: str) -> str:
    if name == "half-memory":
        return circuits.HALF_MEMORY_KEEP_CONTROL
    if name in circuits.CNOT_FAMILIES:
        return name
    raise ValueError(f"unknown family {name!r}")


def _params_from(args) -> QiParams:
    cycles = None if getattr(args, "ideal", False) else args.cycles
    return QiParams(cycles=cycles, theta_rule=_THETA_FLAG[args.theta],
                    absorb_prob=args.absorb, cycle_loss=args.loss)


def _add_param_flags(sub, default_cycles=10000):
    sub.add_argument("--cycles", type=int, default=default_cycles,
                     help="interrogation cycles per gate")
    sub.add_argument("--ideal", action="store_true",
                     help="use the exact many-cycle limit instead")
    sub.add_argument("--theta", choices=sorted(_THETA_FLAG),
                     default="pi-over-n", help="per-cycle rotation rule")
    sub.add_argument("--absorb", type=float, default=1.0,
                     help="absorber interaction probability")
    sub.add_argument("--loss", type=float, default=0.0,
                     help="per-cycle photon loss")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_simulate(args) -> int:
    if (args.file is None) == (args.demo is None):
        raise ValueError("pass exactly one of a circuit file or --demo")
    if args.demo is not None:
        demos = circuits.demo_programs()
        if args.demo not in demos:
            raise ValueError(
                f"unknown demo {args.demo!r}; available: {', '.join(sorted(demos))}")
        program, source = demos[args.demo], args.demo
    else:
        program, source = load_program(args.file), args.file
    params = _params_from(args)
    if args.branches == "all":
        results = circuits.run_all_branches(program, params)
    else:
        rng = np.random.default_rng(args.seed)
        results = [circuits.run(program, params, rng)]
    if args.out == "csv":
        print("branch,failed,branch_weight,success_probability,classical")
        for i, res in enumerate(results):
            classical = ";".join(f"{k}={v}" for k, v in sorted(res.classical.items()))
            print(_csv_line([i, int(res.failed), res.branch_weight,
                             res.success_probability, classical]))
    else:
        payload = {
            "source": source,
            "params": {"cycles": params.cycles, "theta_rule": params.theta_rule,
                       "absorb": params.absorb_prob, "loss": params.cycle_loss},
            "branches": [_result_payload(r) for r in results],
            "success_probability": sum(r.success_probability for r in results),
        }
        print(_emit_json(payload))
    return 2 if all(r.failed for r in results) else 0


_VERIFY_INPUTS = [
    ((1, 0), (1, 0), "c=0 t=0"),
    ((1, 0), (0, 1), "c=0 t=1"),
    ((0, 1), (1, 0), "c=1 t=0"),
    ((0, 1), (0, 1), "c=1 t=1"),
    ((1 / np.sqrt(2), 1 / np.sqrt(2)), (1, 0), "c=+ t=0"),
]


def _cmd_cnot(args) -> int:
    family = _resolve_family(args.family)
    if not args.verify:
        print(serialize_program(circuits.cnot_circuit(family)))
        return 0
    params = _params_from(args)
    worst = 0.0
    for control, target, label in _VERIFY_INPUTS:
        program = circuits.cnot_circuit(family, control=control, target=target)
        dev = oracle.compare(program, params)
        worst = max(worst, dev)
        print(f"input {label}: deviation={_num(dev)}")
    if worst <= ORACLE_TOLERANCE:
        print(f"PASS max_deviation<={_num(ORACLE_TOLERANCE)}")
        return 0
    print(f"FAIL max_deviation={_num(worst)}")
    return 2


def _cmd_census(args) -> int:
    family = _resolve_family(args.family)
    census = circuits.gate_census(circuits.cnot_circuit(family))
    print(",".join(f"{key}={census[key]}" for key in
                   ("h_optical", "qicz", "cc", "h_particle", "detectors")))
    return 0


def _cmd_sweep(args) -> int:
    if args.what == "zeno":
        rows = analysis.zeno_sweep(_parse_cycles_list(args.cycles),
                                   theta_rule=_THETA_FLAG[args.theta],
                                   absorb=args.absorb, loss=args.loss)
        print("n_cycles,theta_rule,absorb,loss,survival")
        for row in rows:
            print(_csv_line([row.n_cycles, row.theta_rule, row.absorb,
                             row.loss, row.survival]))
        return 0
    if args.what == "fidelity":
        rows = analysis.fidelity_sweep(_parse_cycles_list(args.cycles),
                                       absorb=args.absorb, loss=args.loss)
        print("n_cycles,absorb,loss,fidelity")
        for row in rows:
            print(_csv_line([row.n_cycles, row.absorb, row.loss, row.fidelity]))
        return 0
    # yield: closed-form per family
    profile = _parse_profile(args.profile)
    families = (circuits.CNOT_FAMILIES if args.family == "all"
                else [_resolve_family(args.family)])
    print("family,p,q,r,s,eta,formula")
    for family in families:
        print(_csv_line([family, profile.p, profile.q, profile.r, profile.s,
                         profile.eta, analysis.yield_formula(family, profile)]))
    return 0


def _cmd_montecarlo(args) -> int:
    family = _resolve_family(args.family)
    profile = _parse_profile(args.profile)
    program = circuits.cnot_circuit(family)
    est = analysis.monte_carlo_yield(program, profile, args.trials, args.seed)
    print("family,p,q,r,s,eta,trials,seed,estimate,stderr,formula")
    print(_csv_line([family, profile.p, profile.q, profile.r, profile.s,
                     profile.eta, est.trials, est.master_seed, est.estimate,
                     est.stderr, analysis.yield_formula(family, profile)]))
    return 0


def _cmd_oracle_check(args) -> int:
    program = load_program(args.file)
    params = _params_from(args)
    dev = oracle.compare(program, params)
    print(f"deviation={_num(dev)}")
    if dev <= ORACLE_TOLERANCE:
        print(f"PASS max_deviation<={_num(ORACLE_TOLERANCE)}")
        return 0
    print(f"FAIL max_deviation={_num(dev)}")
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zenosim",
                     description="Interrogation-circuit simulator")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a circuit file or demo")
    p.add_argument("file", nargs="?", help="circuit JSON file")
    p.add_argument("--demo", help="built-in program name")
    _add_param_flags(p)
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--branches", choices=("sample", "all"), default="all")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("cnot", help="emit or verify a CNOT realization")
    p.add_argument("--family", required=True)
    p.add_argument("--verify", action="store_true",
                   help="check against the brute-force runner")
    _add_param_flags(p)
    p.set_defaults(handler=_cmd_cnot)

    p = sub.add_parser("census", help="component counts for a CNOT family")
    p.add_argument("--family", required=True)
    p.set_defaults(handler=_cmd_census)

    p = sub.add_parser("sweep", help="CSV sweeps of survival/fidelity/yield")
    p.add_argument("--what", choices=("zeno", "fidelity", "yield"),
                   required=True)
    p.add_argument("--cycles", default="2,5,10,20,50,100,200,500,1000",
                   help="comma-separated cycle counts (zeno/fidelity)")
    p.add_argument("--theta", choices=sorted(_THETA_FLAG), default="pi-over-n")
    p.add_argument("--absorb", type=float, default=1.0)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--profile", default="1,1,1,1,1",
                   help="p,q,r,s,eta (yield)")
    p.add_argument("--family", default="all", help="family or 'all' (yield)")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("montecarlo", help="sampled heralded-success yield")
    p.add_argument("--family", required=True)
    p.add_argument("--profile", required=True, help="p,q,r,s,eta")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_montecarlo)

    p = sub.add_parser("oracle-check",
                       help="compare a circuit file against the brute-force runner")
    p.add_argument("file")
    _add_param_flags(p)
    p.set_defaults(handler=_cmd_oracle_check)
    return parser


def _check_thread_cap() -> None:
    cap = os.environ.get("ZENO_SIM_THREADS")
    if cap is None:
        return
    try:
        value = int(cap)
    except ValueError:
        value = 0
    if value < 1:
        raise ValueError(
            f"ZENO_SIM_THREADS must be a positive integer, got {cap!r}")
    # execution is single-threaded, which respects any positive cap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        _check_thread_cap()
        args = parser.parse_args(argv)
        return args.handler(args)
    except (CircuitFileError, ValueError) as exc:
        print(f"zenosim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
