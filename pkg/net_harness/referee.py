"""
Referee for the networked magic-square Bell test

The referee accepts exactly one Alice and one Bob, then plays `rounds`
rounds: it draws independent uniform settings (j, k), sends j to Alice and
k to Bob, waits for both outcome strings and scores them with the
magic-square game function. The empirical game value is 9 times the mean
score. A party that misses the round timeout gets the round aborted; a
malformed message ends the session.
"""

import asyncio
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ArgumentError, ProtocolError
import nonlocal_games as ng
from net_harness import wire
from net_harness.source import slot_of

QUANTUM = "quantum"
LHV = "lhv"
MODES = (QUANTUM, LHV)

Z_95 = 1.959963984540054


@dataclass
class SessionConfig:
    rounds: int
    mode: str = QUANTUM
    seed: int = config.DEFAULT_SEED
    host: str = config.REFEREE_HOST
    port: int = config.REFEREE_PORT
    round_timeout: float = config.ROUND_TIMEOUT
    strategy: Optional[ng.DeterministicStrategy] = None  # lhv mode
    alice_tape: Optional[str] = None  # quantum mode
    bob_tape: Optional[str] = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ArgumentError(f"A session needs at least one round, got {self.rounds}")
        if self.mode not in MODES:
            raise ArgumentError(f"Unknown mode {self.mode!r} (expected one of {MODES})")
        if self.round_timeout <= 0:
            raise ArgumentError(f"Round timeout must be positive, got {self.round_timeout}")


@dataclass
class _Seat:
    """Per-connection state for one party"""
    channel: wire.Channel
    inbox: asyncio.Queue = field(default_factory=asyncio.Queue)


class Referee:
    """Runs one session; `log` captures every message through the referee's channels"""

    def __init__(self, session: SessionConfig, log: Optional[list] = None):
        self.session = session
        self.log = log if log is not None else []
        self.game = ng.magic_square_game()
        self.seats: Dict[str, _Seat] = {}
        self._both_seated = asyncio.Event()
        self._done = asyncio.Event()
        self.bound_port: Optional[int] = None

    async def _handle_connection(self, reader, writer):
        channel = wire.Channel(reader, writer, local=wire.REFEREE, log=self.log)
        try:
            hello = await asyncio.wait_for(channel.receive(), timeout=config.CONNECT_TIMEOUT)
        except (ProtocolError, asyncio.TimeoutError) as e:
            debug_log("ERROR-NET", f"Rejected connection without a valid hello: {e}")
            await channel.close()
            return
        if hello is None or hello.kind != "hello" or hello.role not in wire.PARTIES or hello.role in self.seats:
            role = getattr(hello, "role", None)
            debug_log("ERROR-NET", f"Rejected hello from role {role!r}")
            await channel.send(wire.make("error", payload={"reason": f"role {role!r} not available"}))
            await channel.close()
            return
        seat = _Seat(channel)
        self.seats[hello.role] = seat
        await channel.send(wire.make("hello", role=wire.REFEREE))
        if DebugConfig.net_enabled:
            debug_log("DEBUG-NET", f"{hello.role} seated")
        if all(role in self.seats for role in wire.PARTIES):
            self._both_seated.set()
        await self._pump(hello.role, seat)

    async def _pump(self, role: str, seat: _Seat):
        """Move incoming messages (or the error that ended the stream) into the inbox"""
        while not self._done.is_set():
            try:
                message = await seat.channel.receive()
            except ProtocolError as e:
                await seat.inbox.put(e)
                return
            except (ConnectionError, OSError) as e:
                await seat.inbox.put(ProtocolError(f"{role} connection failed: {e}"))
                return
            if message is None:
                if not self._done.is_set():
                    await seat.inbox.put(ProtocolError(f"{role} disconnected"))
                return
            await seat.inbox.put(message)

    async def _await_outcome(self, role: str, round_id: int):
        """Outcome for this round, None on timeout or a party-side error"""
        inbox = self.seats[role].inbox
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.session.round_timeout
        while True:
            remaining = deadline - loop.time()
            if remaining <= 0:
                debug_log("ERROR-NET", f"Round {round_id}: {role} timed out, round aborted")
                return None
            try:
                item = await asyncio.wait_for(inbox.get(), timeout=remaining)
            except asyncio.TimeoutError:
                debug_log("ERROR-NET", f"Round {round_id}: {role} timed out, round aborted")
                return None
            if isinstance(item, Exception):
                raise item
            if item.kind == "error":
                debug_log("ERROR-NET", f"Round {round_id}: {role} reported {item.payload}, round aborted")
                return None
            if item.kind != "round_outcome":
                raise ProtocolError(f"{role} sent {item.kind} during a round")
            if item.round_id != round_id:
                # Late answer to an aborted round
                continue
            return tuple(item.outcome)

    async def _play_round(self, round_id: int, j: int, k: int):
        slot = slot_of(j, k) if self.session.mode == QUANTUM else None
        alice, bob = self.seats[wire.ALICE].channel, self.seats[wire.BOB].channel
        await asyncio.gather(
            alice.send(wire.make("round_setting", round_id=round_id, setting=j, slot=slot)),
            bob.send(wire.make("round_setting", round_id=round_id, setting=k, slot=slot)),
        )
        alpha, beta = await asyncio.gather(self._await_outcome(wire.ALICE, round_id),
                                           self._await_outcome(wire.BOB, round_id))
        if alpha is None or beta is None:
            return None
        return self.game(alpha, beta, j, k)

    async def serve(self, ready: Optional[Callable[[int], None]] = None) -> dict:
        """Listen, play the session and return the summary"""
        server = await asyncio.start_server(self._handle_connection, self.session.host, self.session.port)
        self.bound_port = server.sockets[0].getsockname()[1]
        if DebugConfig.net_enabled:
            debug_log("DEBUG-NET", f"referee listening on {self.session.host}:{self.bound_port}")
        if ready is not None:
            ready(self.bound_port)
        async with server:
            try:
                await self._both_seated.wait()
                summary = await self._play()
                for seat in self.seats.values():
                    await seat.channel.send(wire.make("summary", payload=summary))
                return summary
            except ProtocolError as e:
                debug_log("ERROR-NET", f"Session aborted: {e}")
                for seat in self.seats.values():
                    try:
                        await seat.channel.send(wire.make("error", payload={"reason": str(e)}))
                    except (ConnectionError, OSError):
                        pass
                raise
            finally:
                # Close the party streams before the server waits on its connections
                self._done.set()
                for seat in self.seats.values():
                    await seat.channel.close()

    async def _play(self) -> dict:
        rng = np.random.default_rng(self.session.seed)
        settings = rng.integers(1, 4, size=(self.session.rounds, 2))
        scores: List[int] = []
        tallies = {f"{j},{k}": {"rounds": 0, "wins": 0, "aborted": 0}
                   for j in range(1, 4) for k in range(1, 4)}
        for round_id, (j, k) in enumerate(settings):
            j, k = int(j), int(k)
            score = await self._play_round(round_id, j, k)
            tally = tallies[f"{j},{k}"]
            if score is None:
                tally["aborted"] += 1
                continue
            scores.append(score)
            tally["rounds"] += 1
            tally["wins"] += int(score == 1)
            if DebugConfig.net_rounds:
                debug_log("DEBUG-NET", f"round {round_id} settings ({j},{k}) V={score}")
        return summarize(scores, tallies, self.session)


def summarize(scores: List[int], tallies: dict, session: SessionConfig) -> dict:
    """G_hat = 9 * mean V, with its standard error and a 95% interval"""
    completed = len(scores)
    if completed:
        values = np.asarray(scores, dtype=float)
        g_hat = 9.0 * values.mean()
        stderr = 9.0 * values.std(ddof=1) / math.sqrt(completed) if completed > 1 else float("inf")
    else:
        g_hat, stderr = float("nan"), float("inf")
    interval = [g_hat - Z_95 * stderr, g_hat + Z_95 * stderr]
    return {
        "mode": session.mode,
        "seed": session.seed,
        "rounds": session.rounds,
        "completed": completed,
        "aborted": session.rounds - completed,
        "G_hat": _finite(g_hat),
        "stderr": _finite(stderr),
        "ci95": [_finite(x) for x in interval],
        "tallies": tallies,
    }


def _finite(value: float):
    """JSON has no inf/nan"""
    return value if math.isfinite(value) else None


async def run_referee(session: SessionConfig, log: Optional[list] = None,
                      ready: Optional[Callable[[int], None]] = None) -> dict:
    return await Referee(session, log).serve(ready)
