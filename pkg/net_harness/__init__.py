"""
Networked magic-square Bell test: a referee and two parties over TCP

Quantum-mode parties do not share entanglement. A trusted source
pre-samples joint outcomes from the quantum distribution and hands each
party its half (see source.py). The harness reproduces the statistics of
the 9-vs-7 separation and makes no claim about loopholes or real
space-like separation.
"""

from net_harness.referee import LHV, QUANTUM, SessionConfig, run_referee
from net_harness.party_client import LhvParty, PartyClient, TapeParty
from net_harness.session import launch_session, run_party, run_session_local

__all__ = [
    "LHV",
    "QUANTUM",
    "SessionConfig",
    "run_referee",
    "PartyClient",
    "LhvParty",
    "TapeParty",
    "run_party",
    "run_session_local",
    "launch_session",
]
