"""Value types produced by the samplers."""
from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import singledispatch

import numpy as np

from ..gfseries import BalanceVector
from ..oracle import canonical_rotation, is_balanced

WORD_DTYPE = np.uint8
ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


def word_to_string(word) -> str:
    """Render color indices as characters 0-9 then a-z."""
    word = np.asarray(word, dtype=np.uint8)
    if word.size and int(word.max()) >= len(ALPHABET):
        raise ValueError("word format supports at most 36 colors")
    table = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)
    return table[word].tobytes().decode("ascii")


def string_to_word(text: str) -> np.ndarray:
    return np.array([ALPHABET.index(c) for c in text], dtype=WORD_DTYPE)


@dataclass(eq=False)
class Necklace:
    """A v-balanced cycle, stored as the word read from an arbitrary start.

    ``repeats`` records how many copies of a generating block the sampler
    concatenated, which need not be the primitive repetition order.
    """

    word: np.ndarray
    v: BalanceVector
    repeats: int = 1

    @property
    def size(self) -> int:
        return len(self.word)

    def canonical(self) -> tuple:
        return canonical_rotation(self.word.tolist())

    def counts(self) -> list[int]:
        return np.bincount(self.word, minlength=self.v.k).tolist()

    def is_balanced(self) -> bool:
        return is_balanced(self.word, self.v)

    def __eq__(self, other):
        if not isinstance(other, Necklace):
            return NotImplemented
        return self.v == other.v and self.size == other.size and self.canonical() == other.canonical()

    def __hash__(self):
        return hash((self.v, self.canonical()))

    def __str__(self):
        return word_to_string(self.word)


@dataclass(eq=False)
class PointedNecklace:
    """A necklace with a tagged atom at index ``point`` of ``word``."""

    word: np.ndarray
    v: BalanceVector
    point: int = 0
    repeats: int = 1

    @property
    def size(self) -> int:
        return len(self.word)

    def forget(self) -> Necklace:
        return Necklace(self.word, self.v, self.repeats)


@dataclass(frozen=True)
class Cycle:
    """Output of the generic cycle constructor: components read around a cycle."""

    components: tuple
    period: int = field(default=0)

    @property
    def repeats(self) -> int:
        return len(self.components) // self.period if self.period else 1


@singledispatch
def size_of(obj) -> int:
    raise TypeError(f"no size for {type(obj).__name__}")


@size_of.register(int)
@size_of.register(np.integer)
def _(obj) -> int:
    return 1


@size_of.register(tuple)
@size_of.register(list)
def _(obj) -> int:
    return sum(size_of(o) for o in obj)


@size_of.register(np.ndarray)
def _(obj) -> int:
    return int(obj.size)


@size_of.register(Necklace)
@size_of.register(PointedNecklace)
def _(obj) -> int:
    return obj.size


@size_of.register(Cycle)
def _(obj) -> int:
    return sum(size_of(o) for o in obj.components)


@size_of.register(type(None))
def _(obj) -> int:
    return 0


@singledispatch
def flatten(obj) -> list[int]:
    """The sequence of atoms of a structure, left to right."""
    raise TypeError(f"cannot flatten {type(obj).__name__}")


@flatten.register(int)
@flatten.register(np.integer)
def _(obj):
    return [int(obj)]


@flatten.register(tuple)
@flatten.register(list)
def _(obj):
    out = []
    for o in obj:
        out.extend(flatten(o))
    return out


@flatten.register(np.ndarray)
def _(obj):
    return obj.tolist()


@flatten.register(Necklace)
@flatten.register(PointedNecklace)
def _(obj):
    return obj.word.tolist()


@flatten.register(Cycle)
def _(obj):
    return flatten(list(obj.components))


# ---------------------------------------------------------------------------
# cost instrumentation

@dataclass
class CostMeter:
    atoms: int = 0
    calls: int = 0


_meter: contextvars.ContextVar[CostMeter | None] = contextvars.ContextVar("cost_meter", default=None)


@contextmanager
def cost_meter():
    """Count atoms written by the samplers inside the ``with`` block."""
    meter = CostMeter()
    token = _meter.set(meter)
    try:
        yield meter
    finally:
        _meter.reset(token)


def record_atoms(n: int) -> None:
    meter = _meter.get()
    if meter is not None:
        meter.atoms += n
