"""
Exception types shared by the simulators, games and the net harness
"""


class DimensionError(ValueError):
    """Operands live on different numbers of Majorana modes"""


class ArgumentError(ValueError):
    """Invalid indices, observables, probabilities or encodings"""


class StateError(RuntimeError):
    """A covariance matrix (or state) that is not physical"""


class ConsistencyError(AssertionError):
    """An internal self-check failed (tables, sign patterns, backends)"""


class ResourceError(MemoryError):
    """Requested instance is beyond what the dense oracle will hold"""


class ProtocolError(RuntimeError):
    """Malformed or out-of-pattern traffic in the Bell-test harness"""
