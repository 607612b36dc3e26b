"""
Protocol-conformance replay over captured session logs

A log is a list of {"sender", "receiver", "kind", "round_id", ...} entries
as recorded by the referee's channels (one JSON object per line on disk).
"""

import json
from typing import Dict, List, Sequence

from majorana_errors import ProtocolError
from net_harness.wire import PARTIES, PARTY_TO_REFEREE, REFEREE, REFEREE_TO_PARTY


def conformance_violations(log: Sequence[dict]) -> List[str]:
    """Every out-of-pattern message in the log"""
    violations = []
    pending: Dict[str, set] = {party: set() for party in PARTIES}
    for index, entry in enumerate(log):
        sender, receiver, kind = entry.get("sender"), entry.get("receiver"), entry.get("kind")
        where = f"entry {index} ({sender} -> {receiver}, {kind})"
        if sender in PARTIES and receiver in PARTIES:
            violations.append(f"{where}: parties may not exchange messages")
            continue
        if sender in PARTIES and receiver == REFEREE:
            if kind not in PARTY_TO_REFEREE:
                violations.append(f"{where}: parties may not send {kind}")
            elif kind == "round_outcome":
                round_id = entry.get("round_id")
                if round_id not in pending[sender]:
                    violations.append(f"{where}: outcome for round {round_id} that was never set")
                else:
                    pending[sender].discard(round_id)
        elif sender == REFEREE and receiver in PARTIES:
            if kind not in REFEREE_TO_PARTY:
                violations.append(f"{where}: the referee may not send {kind}")
            elif kind == "round_setting":
                pending[receiver].add(entry.get("round_id"))
        else:
            violations.append(f"{where}: unknown endpoints")
    return violations


def replay(log: Sequence[dict]):
    """Raise ProtocolError on the first out-of-pattern message"""
    violations = conformance_violations(log)
    if violations:
        raise ProtocolError(violations[0])


def write_log(log: Sequence[dict], path: str):
    with open(path, "w", encoding="utf-8") as f:
        for entry in log:
            f.write(json.dumps(entry, sort_keys=True) + "\n")


def read_log(path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
