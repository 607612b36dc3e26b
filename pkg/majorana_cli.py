"""
Command-line front end: every experiment as a subcommand

Reports go to stdout as sorted JSON (or CSV for sweeps); PASS/FAIL and
diagnostics go to stderr. Exit codes: 0 success, 1 failed assertion,
2 usage error.
"""

import argparse
import asyncio
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from colorama import Fore, Style, init as colorama_init

import config
import settings_manager
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ConsistencyError, DimensionError, ProtocolError, ResourceError, StateError
import crosscheck as xc
import ghz_checker as ghz
import nonlocal_games as ng
import protocols
from net_harness import wire
from net_harness.conformance import conformance_violations, write_log
from net_harness.referee import LHV, MODES, QUANTUM, SessionConfig, run_referee
from net_harness.session import run_party
from net_harness.source import source_generate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

BACKENDS = ("stabilizer", "gaussian", "oracle")
DEFAULT_BACKEND = "stabilizer"
FORMATS = ("json", "csv")

# Subcommands that honour --backend -> Majorana modes their experiment needs
BACKEND_MODES = {
    "magic-square": 2 * ng.MAGIC_SQUARE_PAIRS,
    "teleport": 2 * protocols.TELEPORT_PAIRS,
}


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    trials: int
    fmt: str
    backend: str
    threads: int

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        if args.trials < 0:
            raise ArgumentError(f"--trials must be non-negative, got {args.trials}")
        if args.threads < 1:
            raise ArgumentError(f"--threads must be at least 1, got {args.threads}")
        backend = args.backend or DEFAULT_BACKEND
        if args.backend is not None and args.command not in BACKEND_MODES:
            raise ArgumentError(f"--backend is only used by {', '.join(sorted(BACKEND_MODES))}, not {args.command}")
        if backend == "oracle" and BACKEND_MODES.get(args.command, 0) > config.MAX_ORACLE_MODES:
            raise ResourceError(f"{args.command} needs {BACKEND_MODES[args.command]} modes, "
                                f"beyond the oracle cap of {config.MAX_ORACLE_MODES}")
        return cls(args.command, args.seed, args.trials, args.format, backend, args.threads)


def _number(value):
    """Exact values as int or 'p/q' strings, floats unchanged"""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


# ---------------------------------------------------------------------------
# Subcommands: each returns (report, passed)
# ---------------------------------------------------------------------------

def cmd_magic_square(args, run: RunConfig) -> Tuple[dict, bool]:
    square = ng.magic_square_observables()
    checks = ng.square_checks(square)
    game = ng.magic_square_game()
    exact = ng.quantum_distribution()
    value = ng.game_value(game, exact)
    if run.backend == "stabilizer":
        simulated = ng.simulated_quantum_distribution()
        agrees = simulated.equals(exact)
    elif run.backend == "gaussian":
        simulated = ng.noisy_distribution(0.0)
        agrees = simulated.equals(exact, tol=config.FLOAT_MATCH_TOL)
    else:
        simulated = ng.oracle_noisy_distribution(0.0)
        agrees = simulated.equals(exact, tol=config.FLOAT_MATCH_TOL)
    report = {
        "seed": run.seed,
        "backend": run.backend,
        "quantum_value": _number(value),
        "backend_value": _number(ng.game_value(game, simulated)),
        "backend_matches_exact": agrees,
        "square_checks": {"total": len(checks), "passed": sum(ok for _, ok in checks)},
        "non_signalling": exact.is_non_signalling(),
        "parity_strategy_value": _number(ng.game_value(game, ng.strategy_distribution(ng.parity_strategy()))),
    }
    passed = value == 9 and agrees and all(ok for _, ok in checks)
    if args.exact:
        report["distribution"] = exact.to_dict()
    else:
        rounds = run.trials
        estimate, stderr = ng.monte_carlo_value(simulated, rounds, np.random.default_rng(run.seed))
        report["sampled"] = {"rounds": rounds, "G_hat": _number(estimate), "stderr": _number(stderr)}
    return report, passed


def cmd_classical_bound(args, run: RunConfig) -> Tuple[dict, bool]:
    game = ng.magic_square_game()
    bound = ng.classical_bound(game, threads=run.threads)
    identical = ng.classical_bound(game, identical=True)
    report = {
        "seed": run.seed,
        "bound": _number(bound.value),
        "strategy": bound.strategy.to_dict(),
        "checked": bound.checked,
        "identical_bound": _number(identical.value),
        "identical_strategy": identical.strategy.to_dict(),
        "identical_checked": identical.checked,
    }
    return report, bound.value == ng.BELL_BOUND and identical.value == 3


def cmd_four_pair(args, run: RunConfig) -> Tuple[dict, bool]:
    quantum = ng.four_pair_distribution()
    lhv = ng.four_pair_lhv()
    simulated = ng.simulated_four_pair_distribution()
    entries = len(ng.outcome_strings(2)) ** 2 * len(quantum.settings())
    report = {
        "seed": run.seed,
        "entries_compared": entries,
        "lhv_matches": lhv.equals(quantum),
        "simulation_matches": simulated.equals(quantum),
        "non_signalling": quantum.is_non_signalling(),
        "hidden_variables": len(ng.hidden_variables()),
        "distribution": quantum.to_dict(),
    }
    return report, report["lhv_matches"] and report["simulation_matches"]


def cmd_ghz_scan(args, run: RunConfig) -> Tuple[dict, bool]:
    sizes = [args.pairs] if args.pairs else list(range(1, 7))
    results = {}
    for offset, n_pairs in enumerate(sizes):
        scan = ghz.random_accessible_scan(n_pairs, run.trials, run.seed + offset)
        results[str(n_pairs)] = scan.to_dict()
    passed = all(r["verdict"] == "pass" and r["noncommuting"] == 0 for r in results.values())
    return {"seed": run.seed, "trials": run.trials, "scans": results}, passed


def cmd_ghz_encoding(args, run: RunConfig) -> Tuple[dict, bool]:
    report = {"seed": run.seed, "parties": args.parties,
              "canonical": ghz.ghz_obstruction(ghz.canonical_encoding(args.parties))}
    passed = report["canonical"]["verdict"] == "obstructed"
    if args.modes_per_party:
        scan = ghz.exhaustive_encoding_scan(args.modes_per_party, args.parties, samples=run.trials, seed=run.seed)
        report["exhaustive"] = scan.to_dict()
        passed = passed and scan.verdict == "obstructed"
    return report, passed


def cmd_teleport(args, run: RunConfig) -> Tuple[dict, bool]:
    setup = protocols.TeleportSetup(args.scenario)
    report = protocols.teleport_summary(setup, run.trials, run.seed, run.threads)
    corrected = protocols.corrected_distribution(setup, run.backend)
    direct = protocols.direct_input_distribution(setup, run.backend)
    variation = protocols.total_variation(corrected, direct)
    report["backend"] = run.backend
    report["backend_total_variation"] = _number(Fraction(variation) if run.backend != "gaussian" else variation)
    report["example_run"] = [json.loads(line) for line in
                             protocols.teleport_transcript_lines(protocols.teleport(setup, run.seed))]
    pvalue = report["two_sample_pvalue"]
    passed = report["total_variation"] == "0" and variation <= config.FLOAT_MATCH_TOL
    if pvalue is not None:
        passed = passed and pvalue >= args.significance
    return report, passed


def cmd_dense_code(args, run: RunConfig) -> Tuple[dict, bool]:
    round_trip = protocols.dense_round_trip()
    capacity = protocols.unassisted_capacity_check(args.transmitted_modes)
    report = {"seed": run.seed, "round_trip": round_trip, "unassisted": capacity}
    passed = round_trip["successes"] == 4
    if args.transmitted_modes == 2:
        passed = passed and capacity["max_distinguishable"] == 2
    return report, passed


def cmd_noise_sweep(args, run: RunConfig) -> Tuple[dict, bool]:
    sweep = ng.noise_sweep(ng.default_grid(args.points), rounds=run.trials, seed=run.seed)
    values = [p.value for p in sweep.points]
    monotone = all(b <= a + config.FLOAT_MATCH_TOL for a, b in zip(values, values[1:]))
    anchors = []
    if sweep.bracket:
        for eps in sweep.bracket:
            gaussian_value = ng.noisy_value(eps)
            oracle_value = ng.oracle_noisy_value(eps, "pairs")
            anchors.append({"eps": eps, "G": gaussian_value, "G_oracle": oracle_value,
                            "match": abs(gaussian_value - oracle_value) <= 1e-6})
    report = sweep.to_dict()
    report.update({
        "monotone": monotone,
        "G_at_zero": values[0],
        "oracle_anchors": anchors,
        "global_channel_at_threshold": ng.oracle_noisy_value(sweep.threshold, "global") if sweep.threshold else None,
    })
    passed = values[0] == 9.0 and monotone and all(a["match"] for a in anchors)
    return report, passed


def _load_strategy(choice: Optional[str]) -> ng.DeterministicStrategy:
    if choice in (None, "parity"):
        return ng.parity_strategy()
    if choice == "identical":
        return ng.classical_bound(ng.magic_square_game(), identical=True).strategy
    with open(choice, "r", encoding="utf-8") as f:
        return ng.DeterministicStrategy.from_dict(json.load(f))


def cmd_serve(args, run: RunConfig) -> Tuple[dict, bool]:
    settings = settings_manager.load_settings()
    host = args.host or settings.get("referee_host", config.REFEREE_HOST)
    port = args.port if args.port is not None else settings.get("referee_port", config.REFEREE_PORT)
    if args.role == wire.REFEREE:
        timeout = args.round_timeout or settings.get("round_timeout", config.ROUND_TIMEOUT)
        session = SessionConfig(rounds=args.rounds, mode=args.mode, seed=run.seed, host=host, port=port,
                                round_timeout=timeout)
        log: List[dict] = []
        summary = asyncio.run(run_referee(session, log=log))
        if args.log:
            write_log(log, args.log)
        summary["conformance_violations"] = len(conformance_violations(log))
        return summary, summary["conformance_violations"] == 0
    strategy = _load_strategy(args.strategy) if args.mode == LHV else None
    session = SessionConfig(rounds=1, mode=args.mode, host=host, port=port, strategy=strategy)
    return asyncio.run(run_party(session, args.role, args.tape)), True


def cmd_source_gen(args, run: RunConfig) -> Tuple[dict, bool]:
    records = source_generate(args.rounds, run.seed, args.alice_tape, args.bob_tape)
    return {"seed": run.seed, "rounds": args.rounds, "records_per_tape": records,
            "alice_tape": args.alice_tape, "bob_tape": args.bob_tape}, True


def cmd_crosscheck(args, run: RunConfig) -> Tuple[dict, bool]:
    report = xc.crosscheck(args.pairs, args.depth, run.trials, run.seed)
    return report.to_dict(), report.passed


COMMANDS: Dict[str, Callable] = {
    "magic-square": cmd_magic_square,
    "classical-bound": cmd_classical_bound,
    "four-pair": cmd_four_pair,
    "ghz-scan": cmd_ghz_scan,
    "ghz-encoding": cmd_ghz_encoding,
    "teleport": cmd_teleport,
    "dense-code": cmd_dense_code,
    "noise-sweep": cmd_noise_sweep,
    "serve": cmd_serve,
    "source-gen": cmd_source_gen,
    "crosscheck": cmd_crosscheck,
}

# Subcommands whose report has a CSV rendering
CSV_COMMANDS = {"noise-sweep"}


def build_parser() -> argparse.ArgumentParser:
    settings = settings_manager.load_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="RNG seed (echoed in the report)")
    common.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS, help="Sampled trials or rounds")
    common.add_argument("--format", choices=FORMATS, default="json", help="Report format")
    common.add_argument("--backend", choices=BACKENDS, default=None,
                        help=f"Simulation backend for {', '.join(sorted(BACKEND_MODES))} (default {DEFAULT_BACKEND})")
    common.add_argument("--threads", type=int, default=settings.get("threads", 1), help="Worker threads")
    common.add_argument("--debug", action="store_true", help="Enable all debug output on stderr")
    common.add_argument("--debug-only", action="append", choices=tuple(DebugConfig.SUBSYSTEMS), default=None,
                        metavar="SUBSYSTEM", help="Enable one subsystem's debug output (repeatable)")

    parser = argparse.ArgumentParser(prog="majorana_cli", description="Majorana-fermion nonlocality experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("magic-square", parents=[common], help="Magic-square game value on five shared pairs")
    p.add_argument("--exact", action="store_true", help="Include the exact joint distribution instead of sampling")
    sub.add_parser("classical-bound", parents=[common], help="Exhaustive classical bound of the magic-square game")
    sub.add_parser("four-pair", parents=[common], help="Four-pair distribution against its hidden-variable model")

    p = sub.add_parser("ghz-scan", parents=[common], help="Pair/triple parity scan over random accessible states")
    p.add_argument("--pairs", type=int, default=None, help="Number of pairs (default: 1..6)")

    p = sub.add_parser("ghz-encoding", parents=[common], help="GHZ obstruction for local encodings")
    p.add_argument("--parties", type=int, default=3)
    p.add_argument("--modes-per-party", type=int, default=None, help="Also scan all encodings on this many modes")

    p = sub.add_parser("teleport", parents=[common], help="Teleportation through four shared pairs")
    p.add_argument("--scenario", choices=protocols.SCENARIOS, default=protocols.SCENARIO_PLAIN)
    p.add_argument("--significance", type=float, default=1e-3, help="Two-sample test level")

    p = sub.add_parser("dense-code", parents=[common], help="Dense coding round trip and unassisted capacity")
    p.add_argument("--transmitted-modes", type=int, default=2)

    p = sub.add_parser("noise-sweep", parents=[common], help="Game value under depolarising noise")
    p.add_argument("--points", type=int, default=config.NOISE_GRID_POINTS, help="Grid points on [0, 1]")

    p = sub.add_parser("serve", parents=[common], help="Run one process of the networked Bell test")
    p.add_argument("role", choices=(wire.REFEREE,) + wire.PARTIES)
    p.add_argument("--mode", choices=MODES, default=QUANTUM)
    p.add_argument("--rounds", type=int, default=config.DEFAULT_TRIALS)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--round-timeout", type=float, default=None)
    p.add_argument("--strategy", default=None, help="lhv mode: parity, identical or a JSON file")
    p.add_argument("--tape", default=None, help="quantum mode: this party's tape file")
    p.add_argument("--log", default=None, help="referee: write the captured message log here")

    p = sub.add_parser("source-gen", parents=[common], help="Pre-sample correlated outcome tapes")
    p.add_argument("--rounds", type=int, default=config.DEFAULT_TRIALS)
    p.add_argument("--alice-tape", default="alice.tape")
    p.add_argument("--bob-tape", default="bob.tape")

    p = sub.add_parser("crosscheck", parents=[common], help="Compare the three simulation backends")
    p.add_argument("--pairs", type=int, default=2)
    p.add_argument("--depth", type=int, default=4)
    return parser


def _status(passed: bool, command: str):
    if passed:
        print(f"{Fore.GREEN}PASS{Style.RESET_ALL} {command}", file=sys.stderr)
    else:
        print(f"{Fore.RED}FAIL{Style.RESET_ALL} {command}", file=sys.stderr)


def emit(report: dict, fmt: str, command: str, out=None):
    out = out or sys.stdout
    if fmt == "csv":
        out.write(ng.NoiseSweep(
            [ng.NoisePoint(p["eps"], p["value"], p["mc_value"], p["stderr"]) for p in report["points"]]).to_csv())
    else:
        out.write(json.dumps(report, sort_keys=True, indent=2, default=_number) + "\n")
    out.flush()


def main(argv: Optional[Sequence[str]] = None) -> int:
    colorama_init()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    if args.debug:
        DebugConfig.enable_all()
    for subsystem in args.debug_only or ():
        DebugConfig.enable(subsystem)
    try:
        run = RunConfig.from_args(args)
        if run.fmt == "csv" and run.subcommand not in CSV_COMMANDS:
            raise ArgumentError(f"--format csv is only available for {', '.join(sorted(CSV_COMMANDS))}")
        if DebugConfig.cli_enabled:
            debug_log("DEBUG-CLI", f"{run}")
        report, passed = COMMANDS[run.subcommand](args, run)
    except (ArgumentError, DimensionError, ResourceError, OSError) as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, StateError, ProtocolError) as e:
        debug_log("ERROR-CLI", f"{run.subcommand}: {e}")
        _status(False, run.subcommand)
        return EXIT_FAILED

    emit(report, run.fmt, run.subcommand)
    _status(passed, run.subcommand)
    return EXIT_OK if passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
