"""
Wire format for the Bell-test harness

Newline-delimited JSON over a plain TCP stream. Every message carries the
mandatory protocol version; unknown fields are ignored on decode.

Message flow (parties never talk to each other):
    party   -> referee : hello, round_outcome, error
    referee -> party   : hello, round_setting, summary, error
"""

import json
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

import config
from debug_config import DebugConfig, debug_log
from majorana_errors import ProtocolError


REFEREE = "referee"
ALICE = "alice"
BOB = "bob"
PARTIES = (ALICE, BOB)

Kind = Literal["hello", "round_setting", "round_outcome", "summary", "error"]

PARTY_TO_REFEREE = {"hello", "round_outcome", "error"}
REFEREE_TO_PARTY = {"hello", "round_setting", "summary", "error"}


class WireMessage(BaseModel):
    model_config = ConfigDict(extra="ignore")

    version: int
    kind: Kind
    round_id: int = 0
    role: Optional[str] = None
    setting: Optional[int] = None
    slot: Optional[int] = None
    outcome: Optional[List[int]] = None
    payload: Optional[dict] = None

    @field_validator("version")
    @classmethod
    def known_version(cls, value):
        if value != config.WIRE_VERSION:
            raise ValueError(f"unsupported wire version {value}")
        return value

    @field_validator("outcome")
    @classmethod
    def signs_only(cls, value):
        if value is not None and (len(value) != 3 or any(v not in (1, -1) for v in value)):
            raise ValueError(f"outcome must be three +-1 values, got {value}")
        return value

    @model_validator(mode="after")
    def required_fields(self):
        if self.kind == "round_setting" and self.setting is None:
            raise ValueError("round_setting needs a setting")
        if self.kind == "round_outcome" and self.outcome is None:
            raise ValueError("round_outcome needs an outcome")
        if self.kind == "hello" and self.role not in (REFEREE,) + PARTIES:
            raise ValueError(f"hello needs a known role, got {self.role!r}")
        return self


def make(kind: str, **fields) -> WireMessage:
    return WireMessage(version=config.WIRE_VERSION, kind=kind, **fields)


def encode(message: WireMessage) -> bytes:
    return json.dumps(message.model_dump(exclude_none=True), sort_keys=True).encode() + b"\n"


def decode(line) -> WireMessage:
    """One JSON line -> WireMessage; anything malformed is a ProtocolError"""
    if isinstance(line, bytes):
        line = line.decode(errors="replace")
    try:
        return WireMessage.model_validate(json.loads(line))
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise ProtocolError(f"Malformed message {line.strip()[:120]!r}: {e}") from e


class Channel:
    """One stream connection; optionally records traffic for conformance replay"""

    def __init__(self, reader, writer, local: str, peer: str = "unknown", log: Optional[list] = None):
        self.reader = reader
        self.writer = writer
        self.local = local
        self.peer = peer
        self.log = log

    async def readline(self):
        if not (line := await self.reader.readline()):
            return None
        # Strip the newline
        return line[:-1].decode(errors="replace")

    async def receive(self) -> Optional[WireMessage]:
        if (plaintext := await self.readline()) is None:
            return None
        message = decode(plaintext)
        if message.kind == "hello" and self.peer == "unknown":
            self.peer = message.role
        if DebugConfig.net_messages:
            debug_log("DEBUG-NET", f"{self.local} <- {self.peer}: {plaintext}")
        self._record(self.peer, self.local, message)
        return message

    async def send(self, message: WireMessage):
        data = encode(message)
        self.writer.write(data)
        await self.writer.drain()
        if DebugConfig.net_messages:
            debug_log("DEBUG-NET", f"{self.local} -> {self.peer}: {data[:-1].decode()}")
        self._record(self.local, self.peer, message)

    def _record(self, sender: str, receiver: str, message: WireMessage):
        if self.log is not None:
            self.log.append({"sender": sender, "receiver": receiver, **message.model_dump(exclude_none=True)})

    async def close(self):
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionError, OSError):
            pass
