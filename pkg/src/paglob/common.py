"""Small shared types: words, validation reports, precondition errors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

Word = tuple[int, ...]

INF = math.inf


class PreconditionError(ValueError):
    """An operation was called on data that violates its contract
    (e.g. a distance query on a non-confluent action)."""


@dataclass
class ValidationReport:
    valid: bool
    violations: list[str] = field(default_factory=list)
    flags: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.valid


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def to_mask(items) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m
