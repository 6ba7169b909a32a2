"""Address arithmetic over fixed-width node identifiers.

Bits are numbered from 0 at the most significant end.  The colour of a node
at level ``i`` is taken from bit ``i`` under that numbering: bit 0 makes the
node white, bit 1 makes it black.  Every other module goes through
:func:`bit_at` / :func:`color_at` so the convention lives in one place.

Internally identifiers are plain ``int`` values plus a shared width; the
:class:`NodeId` wrapper exists for the public API, where width mismatches
must be caught.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

DEFAULT_WIDTH = 16
MAX_WIDTH = 64


class UsageError(ValueError):
    """Raised when an operation is called outside its preconditions."""


class Color(enum.IntEnum):
    WHITE = 0
    BLACK = 1


@dataclass(frozen=True, order=True)
class NodeId:
    bits: int
    width: int = DEFAULT_WIDTH

    def __post_init__(self) -> None:
        if not 1 <= self.width <= MAX_WIDTH:
            raise UsageError(f"width must be in [1, {MAX_WIDTH}], got {self.width}")
        if not 0 <= self.bits < (1 << self.width):
            raise UsageError(f"{self.bits} does not fit in {self.width} bits")

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        """Parse ``01100`` (binary, width = length) or ``0x1f/8`` (hex with width)."""
        text = text.strip()
        if text.lower().startswith("0x"):
            digits, sep, width = text[2:].partition("/")
            if not sep:
                raise UsageError(f"hex identifier {text!r} needs an explicit /width")
            return cls(int(digits, 16), int(width))
        if not text or set(text) - {"0", "1"}:
            raise UsageError(f"not a binary identifier: {text!r}")
        return cls(int(text, 2), len(text))

    def __str__(self) -> str:
        return format_id(self.bits, self.width)

    def hex(self) -> str:
        return f"0x{self.bits:x}/{self.width}"


def format_id(value: int, width: int) -> str:
    return format(value, f"0{width}b")


def _check(a: NodeId, b: NodeId) -> None:
    if a.width != b.width:
        raise UsageError(f"width mismatch: {a.width} vs {b.width}")


# -- int-level helpers used on hot paths ------------------------------------

def prefix_len(a: int, b: int, width: int) -> int:
    x = a ^ b
    return width - x.bit_length()


def bit_at(a: int, idx: int, width: int) -> int:
    return (a >> (width - 1 - idx)) & 1


def prefix_of(a: int, length: int, width: int) -> str:
    """The first ``length`` bits of ``a`` as a string (empty for length 0)."""
    if length == 0:
        return ""
    return format_id(a >> (width - length), length)


def has_prefix(a: int, prefix: str, width: int) -> bool:
    if not prefix:
        return True
    return (a >> (width - len(prefix))) == int(prefix, 2)


# -- public API on NodeId ---------------------------------------------------

def common_prefix_len(a: NodeId, b: NodeId) -> int:
    _check(a, b)
    return prefix_len(a.bits, b.bits, a.width)


def xor_distance(a: NodeId, b: NodeId) -> int:
    _check(a, b)
    return a.bits ^ b.bits


def address_bit(a: NodeId, idx: int) -> int:
    if not 0 <= idx < a.width:
        raise UsageError(f"bit index {idx} out of range for width {a.width}")
    return bit_at(a.bits, idx, a.width)


def color_at(a: NodeId, level: int) -> Color:
    return Color(address_bit(a, level))
