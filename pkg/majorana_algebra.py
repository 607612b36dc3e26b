"""
Majorana operator algebra

Exact symbolic products of Majorana operators c_1 ... c_2n with
{c_j, c_k} = 2 delta_jk. Every operator is held in one normal form:

    i^q * c_a1 c_a2 ... c_ak      with a1 < a2 < ... < ak

so the phase lives in Z4 (q) and the support is a bit-vector
(bit j-1 set <=> c_j appears). Strings are immutable values.

Text form used in logs and fixtures: "-i c1 c3 c4", "+c1 c2 c3 c4", "+1".
"""

import re
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from majorana_errors import ArgumentError, DimensionError


_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_TEXT_PATTERN = re.compile(r"^\s*([+-])?\s*(i)?\s*(1)?\s*((?:c\d+\s*)*)$")


@dataclass(frozen=True)
class MajoranaString:
    """A phase times an ordered product of Majorana operators"""
    n_modes: int
    support: int = 0
    phase_power: int = 0

    def __post_init__(self):
        if self.n_modes < 0:
            raise ArgumentError(f"Mode count must be non-negative, got {self.n_modes}")
        if self.support < 0 or self.support >> self.n_modes:
            raise ArgumentError(f"Support {bin(self.support)} exceeds {self.n_modes} modes")
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    @property
    def modes(self) -> Tuple[int, ...]:
        """Support as ascending 1-based mode indices"""
        return tuple(j + 1 for j in range(self.n_modes) if (self.support >> j) & 1)

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_identity(self) -> bool:
        return self.support == 0

    @property
    def is_physical(self) -> bool:
        """Even number of Majorana operators"""
        return self.weight % 2 == 0

    @property
    def is_hermitian(self) -> bool:
        k = self.weight
        return (self.phase_power + k * (k - 1) // 2) % 2 == 0

    def __mul__(self, other):
        return multiply(self, other)

    def __neg__(self):
        return MajoranaString(self.n_modes, self.support, self.phase_power + 2)

    def times_phase(self, power: int):
        """Multiply by i^power"""
        return MajoranaString(self.n_modes, self.support, self.phase_power + power)

    def __str__(self):
        return render(self)


def identity(n_modes: int, phase_power: int = 0) -> MajoranaString:
    return MajoranaString(n_modes, 0, phase_power)


def mode(n_modes: int, j: int) -> MajoranaString:
    """The single operator c_j"""
    _check_mode(n_modes, j)
    return MajoranaString(n_modes, 1 << (j - 1), 0)


def from_modes(n_modes: int, modes: Iterable[int], phase_power: int = 0) -> MajoranaString:
    """i^phase_power times c_m1 c_m2 ... in the given (possibly unsorted) order"""
    result = identity(n_modes, phase_power)
    for j in modes:
        result = multiply(result, mode(n_modes, j))
    return result


def pair(n_modes: int, j: int, k: int, sign: int = 1) -> MajoranaString:
    """sign * i c_j c_k, the charge observable of modes j and k"""
    if j == k:
        raise ArgumentError(f"A charge observable needs two distinct modes, got ({j}, {k})")
    if sign not in (1, -1):
        raise ArgumentError(f"Sign must be +1 or -1, got {sign}")
    return from_modes(n_modes, (j, k), 1 if sign == 1 else 3)


def multiply(s: MajoranaString, t: MajoranaString) -> MajoranaString:
    """Canonical product s * t

    Sorting the concatenated supports moves every c_b of t left past each
    c_a of s with a > b; each such transposition contributes -1. Equal
    indices meet and annihilate (c_j^2 = 1).
    """
    _check_same_modes(s, t)
    transpositions = 0
    remaining = t.support
    while remaining:
        low = remaining & -remaining
        b = low.bit_length()  # 1-based mode of this bit
        transpositions += (s.support >> b).bit_count()
        remaining ^= low
    phase = s.phase_power + t.phase_power + 2 * (transpositions & 1)
    return MajoranaString(s.n_modes, s.support ^ t.support, phase)


def commutes(s: MajoranaString, t: MajoranaString) -> bool:
    """True iff s t = t s

    Swapping the two products costs |s||t| transpositions minus one per
    shared mode, so they commute iff |s||t| - overlap is even.
    """
    return (s.weight * t.weight - overlap(s, t)) % 2 == 0


def overlap(s: MajoranaString, t: MajoranaString) -> int:
    """Number of modes the two supports share"""
    _check_same_modes(s, t)
    return (s.support & t.support).bit_count()


def triple_overlap(s: MajoranaString, t: MajoranaString, u: MajoranaString) -> int:
    """Number of modes present in all three supports"""
    _check_same_modes(s, t)
    _check_same_modes(s, u)
    return (s.support & t.support & u.support).bit_count()


def dagger(s: MajoranaString) -> MajoranaString:
    # reversing k operators costs k(k-1)/2 transpositions
    k = s.weight
    return MajoranaString(s.n_modes, s.support, -s.phase_power + 2 * (k * (k - 1) // 2))


def product(strings: Iterable[MajoranaString], n_modes: int) -> MajoranaString:
    """Ordered product of a sequence of strings (identity when empty)"""
    result = identity(n_modes)
    for s in strings:
        result = multiply(result, s)
    return result


def render(s: MajoranaString) -> str:
    prefix = _PHASE_PREFIX[s.phase_power]
    if s.is_identity:
        return prefix + ("" if prefix.endswith("i") else "1")
    body = " ".join(f"c{j}" for j in s.modes)
    separator = " " if prefix.endswith("i") else ""
    return f"{prefix}{separator}{body}"


def parse(text: str, n_modes: int) -> MajoranaString:
    """Read the render() format back; mode tokens may come in any order"""
    match = _TEXT_PATTERN.match(text)
    if not match or not text.strip():
        raise ArgumentError(f"Cannot parse Majorana string: {text!r}")
    sign, imaginary, one, body = match.groups()
    tokens = body.split()
    if one and tokens:
        raise ArgumentError(f"Identity marker mixed with modes in {text!r}")
    if not (sign or imaginary or one or tokens):
        raise ArgumentError(f"Cannot parse Majorana string: {text!r}")
    phase = (2 if sign == "-" else 0) + (1 if imaginary else 0)
    modes: List[int] = [int(token[1:]) for token in tokens]
    return from_modes(n_modes, modes, phase)


def _check_mode(n_modes: int, j: int):
    if not 1 <= j <= n_modes:
        raise ArgumentError(f"Mode c{j} outside 1..{n_modes}")


def _check_same_modes(s: MajoranaString, t: MajoranaString):
    if s.n_modes != t.n_modes:
        raise DimensionError(f"Strings on {s.n_modes} and {t.n_modes} modes cannot be combined")
