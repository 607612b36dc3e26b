"""
Session launchers: everything in one event loop, or three OS processes
"""

import asyncio
import json
import os
import subprocess
import sys
import tempfile
from dataclasses import replace
from typing import List, Optional, Tuple

import psutil

from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ProtocolError
from net_harness import wire
from net_harness.party_client import LhvParty, PartyClient, TapeParty
from net_harness.referee import LHV, QUANTUM, SessionConfig, run_referee
from net_harness.source import generate_records, source_generate, split_tapes

CLI_SCRIPT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "majorana_cli.py")


def build_parties(session: SessionConfig, port: int) -> List[PartyClient]:
    """Alice and Bob for the session's mode, pointed at the given port"""
    common = {"host": session.host, "port": port}
    if session.mode == LHV:
        if session.strategy is None:
            raise ArgumentError("lhv mode needs a strategy")
        return [LhvParty(role, session.strategy, **common) for role in wire.PARTIES]
    if session.alice_tape and session.bob_tape:
        return [TapeParty.from_file(wire.ALICE, session.alice_tape, **common),
                TapeParty.from_file(wire.BOB, session.bob_tape, **common)]
    alice_tape, bob_tape = split_tapes(generate_records(session.rounds, session.seed))
    return [TapeParty(wire.ALICE, alice_tape, **common), TapeParty(wire.BOB, bob_tape, **common)]


async def _run_local(session: SessionConfig, log: list) -> dict:
    bound = asyncio.get_running_loop().create_future()
    referee = asyncio.create_task(run_referee(session, log=log, ready=bound.set_result))
    port = await bound
    tasks = [referee] + [asyncio.create_task(party.run()) for party in build_parties(session, port)]
    done, pending = await asyncio.wait(tasks, return_when=asyncio.FIRST_EXCEPTION)
    failed = [task for task in done if task.exception() is not None]
    if failed:
        for task in pending:
            task.cancel()
        await asyncio.gather(*pending, return_exceptions=True)
        raise failed[0].exception()
    return referee.result()


def run_session_local(session: SessionConfig) -> Tuple[dict, list]:
    """Referee and both parties as tasks on one loop over loopback; returns (summary, log)

    The referee binds an ephemeral port, so session.port is ignored here.
    """
    local = replace(session, port=0)
    log: list = []
    summary = asyncio.run(_run_local(local, log))
    if DebugConfig.net_enabled:
        debug_log("DEBUG-NET", f"local session done: {len(log)} messages logged")
    return summary, log


async def run_party(session: SessionConfig, role: str, tape_path: Optional[str] = None) -> dict:
    """One party for the session's mode, run until the referee's summary

    Args:
        session: Mode, strategy (lhv) and referee address
        role: "alice" or "bob"
        tape_path: This party's tape file (quantum mode)

    Returns:
        dict: role, number of rounds answered and the referee's summary
    """
    common = {"host": session.host, "port": session.port}
    if session.mode == LHV:
        if session.strategy is None:
            raise ArgumentError("lhv mode needs a strategy")
        party: PartyClient = LhvParty(role, session.strategy, **common)
    else:
        if not tape_path:
            raise ArgumentError("quantum-mode parties need a tape file")
        party = TapeParty.from_file(role, tape_path, **common)
    summary = await party.run()
    return {"role": role, "answered": party.answered, "summary": summary}


def _party_command(session: SessionConfig, role: str, workdir: str) -> List[str]:
    command = [sys.executable, CLI_SCRIPT, "serve", role, "--mode", session.mode,
               "--host", session.host, "--port", str(session.port)]
    if session.mode == LHV:
        strategy_path = os.path.join(workdir, "strategy.json")
        with open(strategy_path, "w", encoding="utf-8") as f:
            json.dump(session.strategy.to_dict(), f)
        command += ["--strategy", strategy_path]
    else:
        command += ["--tape", session.alice_tape if role == wire.ALICE else session.bob_tape]
    return command


def terminate_tree(process: subprocess.Popen):
    """Terminate a child and everything it spawned"""
    try:
        parent = psutil.Process(process.pid)
        for child in parent.children(recursive=True):
            try:
                child.terminate()
            except psutil.NoSuchProcess:
                pass
        parent.terminate()
        try:
            parent.wait(timeout=3)
        except psutil.TimeoutExpired:
            parent.kill()
    except (psutil.NoSuchProcess, psutil.AccessDenied):
        # Already gone
        if process.poll() is None:
            process.kill()


def launch_session(session: SessionConfig, log_path: Optional[str] = None, timeout: Optional[float] = None) -> dict:
    """Referee, Alice and Bob as three processes over loopback TCP; returns the referee's summary

    Quantum mode without tape paths writes fresh tapes into a temporary
    directory first.
    """
    if session.mode == LHV and session.strategy is None:
        raise ArgumentError("lhv mode needs a strategy")
    processes: List[subprocess.Popen] = []
    with tempfile.TemporaryDirectory(prefix="majorana-session-") as workdir:
        if session.mode == QUANTUM and not (session.alice_tape and session.bob_tape):
            alice_tape = os.path.join(workdir, "alice.tape")
            bob_tape = os.path.join(workdir, "bob.tape")
            source_generate(session.rounds, session.seed, alice_tape, bob_tape)
            session = replace(session, alice_tape=alice_tape, bob_tape=bob_tape)
        referee_command = [sys.executable, CLI_SCRIPT, "serve", wire.REFEREE, "--mode", session.mode,
                           "--rounds", str(session.rounds), "--seed", str(session.seed),
                           "--host", session.host, "--port", str(session.port),
                           "--round-timeout", str(session.round_timeout)]
        if log_path:
            referee_command += ["--log", log_path]
        if timeout is None:
            timeout = session.rounds * session.round_timeout + 30
        try:
            referee = subprocess.Popen(referee_command, stdout=subprocess.PIPE, text=True, encoding="utf-8")
            processes.append(referee)
            for role in wire.PARTIES:
                processes.append(subprocess.Popen(_party_command(session, role, workdir),
                                                  stdout=subprocess.DEVNULL, text=True))
            if DebugConfig.net_enabled:
                debug_log("DEBUG-NET", f"launched pids {[p.pid for p in processes]}")
            output, _ = referee.communicate(timeout=timeout)
            if referee.returncode != 0:
                raise ProtocolError(f"Referee exited with code {referee.returncode}")
            for party in processes[1:]:
                party.wait(timeout=10)
            return json.loads(output)
        finally:
            for process in processes:
                if process.poll() is None:
                    terminate_tree(process)
