"""
Party clients (Alice, Bob) for the Bell-test harness
"""

import asyncio
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ProtocolError
import nonlocal_games as ng
from net_harness import wire
from net_harness.source import load_tape


class PartyClient(ABC):
    """Abstract base class for a party: connect, say hello, answer settings until the summary"""

    def __init__(self, role: str, host: str = config.REFEREE_HOST, port: int = config.REFEREE_PORT,
                 connect_timeout: float = config.CONNECT_TIMEOUT):
        """Initialize party client

        Args:
            role: "alice" or "bob"
            host: Referee host
            port: Referee port
            connect_timeout: Seconds to keep retrying the initial connection
        """
        if role not in wire.PARTIES:
            raise ValueError(f"Unknown role {role!r}")
        self.role = role
        self.host = host
        self.port = port
        self.connect_timeout = connect_timeout
        self.answered = 0

    @abstractmethod
    def answer(self, round_id: int, setting: int, slot: Optional[int]) -> Tuple[int, int, int]:
        """Outcome string for one round

        Args:
            round_id: Round number
            setting: 1..3 (Alice's column or Bob's row)
            slot: Setting-pair index revealed in the quantum-emulated mode, else None

        Returns:
            Three +-1 values
        """
        pass

    async def _connect(self):
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.connect_timeout
        while True:
            try:
                return await asyncio.open_connection(self.host, self.port)
            except OSError:
                if loop.time() >= deadline:
                    raise
                await asyncio.sleep(0.05)

    async def run(self) -> dict:
        """Play until the referee sends its summary; returns the summary payload"""
        reader, writer = await self._connect()
        channel = wire.Channel(reader, writer, local=self.role, peer=wire.REFEREE)
        try:
            await channel.send(wire.make("hello", role=self.role))
            while True:
                message = await channel.receive()
                if message is None:
                    raise ProtocolError(f"{self.role}: referee closed the connection before the summary")
                if message.kind == "round_setting":
                    await self._handle_setting(channel, message)
                elif message.kind == "summary":
                    return message.payload or {}
                elif message.kind == "error":
                    raise ProtocolError(f"{self.role}: referee reported {message.payload}")
                elif message.kind != "hello":
                    raise ProtocolError(f"{self.role}: unexpected {message.kind}")
        finally:
            await channel.close()

    async def _handle_setting(self, channel: wire.Channel, message: wire.WireMessage):
        if message.setting not in (1, 2, 3):
            await channel.send(wire.make("error", round_id=message.round_id,
                                         payload={"reason": f"unknown setting {message.setting}"}))
            return
        try:
            outcome = self.answer(message.round_id, message.setting, message.slot)
        except KeyError as e:
            await channel.send(wire.make("error", round_id=message.round_id,
                                         payload={"reason": f"no tape entry {e}"}))
            return
        self.answered += 1
        if DebugConfig.net_rounds:
            debug_log("DEBUG-NET", f"{self.role} round {message.round_id} setting {message.setting} -> {outcome}")
        await channel.send(wire.make("round_outcome", round_id=message.round_id, outcome=list(outcome)))


class LhvParty(PartyClient):
    """Answers from a deterministic sign table"""

    def __init__(self, role: str, strategy: ng.DeterministicStrategy, **kwargs):
        super().__init__(role, **kwargs)
        self.strategy = strategy

    def answer(self, round_id, setting, slot):
        if self.role == wire.ALICE:
            return self.strategy.alice_output(setting)
        return self.strategy.bob_output(setting)


class TapeParty(PartyClient):
    """Quantum-emulated party reading its half of the pre-sampled joint outcomes"""

    def __init__(self, role: str, tape: Dict[Tuple[int, int], Tuple[int, int, int]], **kwargs):
        super().__init__(role, **kwargs)
        self.tape = tape

    @classmethod
    def from_file(cls, role: str, path: str, **kwargs) -> "TapeParty":
        return cls(role, load_tape(path), **kwargs)

    def answer(self, round_id, setting, slot):
        if slot is None:
            raise ProtocolError(f"{self.role}: quantum-emulated rounds need a slot")
        return self.tape[(round_id, slot)]
