"""This module contains the problem model: instances of n items hashed into two
tables of m slots each (d slots per table in the d-dimensional variant),
the seeded generator that samples them, placements and their legality,
and the plain text instance format.

Items are the indices 0..n-1. A uniformly random function restricted to n
distinct keys is n independent uniform values, so hash outputs are sampled
directly instead of materializing functions over a key universe.
"""
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import NamedTuple, cast

import numpy as np

from src.cuckooinference.constants import MASK64, SIDES
from src.cuckooinference.hash_types import Occupancy, Side, SlotArray, SlotVector
from src.cuckooinference.numba_funcs import absorb, mix64
from src.cuckooinference.numba_funcs import sample_hashes as nb_sample_hashes


class InstanceFormatError(ValueError):
    """Malformed instance text. `line` is 1-based."""

    def __init__(self, problem: str, line: int) -> None:
        super().__init__(f"{problem} at line {line}")
        self.problem = problem
        self.line = line


@dataclass(frozen=True)
class Seed:
    """Master seed of the counter-based generator."""

    master: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.master, int) or not 0 <= self.master <= MASK64:
            msg = f"seed must be an unsigned 64-bit integer, got {self.master!r}"
            raise ValueError(msg)

    def derive(self, *words: int) -> "Seed":
        """Keyed sub-seed. Equal word sequences always give the same seed."""
        # numba hands uint64 results back as Python ints; keep the key unsigned between calls
        key = np.uint64(mix64(np.uint64(self.master)))
        for word in words:
            key = np.uint64(absorb(key, np.uint64(word & MASK64)))

        return Seed(int(key))


class Instance:
    """n items with their slot vectors under both hash functions.

    hashes[i, s] holds the d slot indices of item i in table s, all in [0, m).
    The array is copied on construction and made read-only.
    """

    __slots__ = ("_m", "_d", "_hashes")

    def __init__(self, m: int, d: int, hashes: SlotArray | Sequence) -> None:
        if m < 1:
            msg = f"m must be positive, got {m}"
            raise ValueError(msg)

        if d < 1:
            msg = f"d must be positive, got {d}"
            raise ValueError(msg)

        given = np.asarray(hashes)
        if given.size == 0 and given.ndim < 3:
            given = np.empty((0, 2, d), np.int64)

        if given.ndim != 3 or given.shape[1:] != (2, d):
            msg = f"hashes must have shape (n, 2, {d}), got {given.shape}"
            raise ValueError(msg)

        if not np.issubdtype(given.dtype, np.integer):
            msg = f"slot indices must be integers, got dtype {given.dtype}"
            raise ValueError(msg)

        arr = given.astype(np.int64, copy=True)

        if arr.size and (arr.min() < 0 or arr.max() >= m):
            msg = f"slot indices must lie in [0, {m})"
            raise ValueError(msg)

        arr.setflags(write=False)

        self._m = m
        self._d = d
        self._hashes: SlotArray = arr

    @classmethod
    def from_slots(cls, m: int, h0: Sequence[int | Sequence[int]], h1: Sequence[int | Sequence[int]]) -> "Instance":
        """Builds an instance from per-item slots, e.g. from_slots(4, [2], [3]) or
        from_slots(4, [(3, 3)], [(1, 2)]). Plain ints mean d = 1."""
        if len(h0) != len(h1):
            msg = "h0 and h1 must list the same number of items"
            raise ValueError(msg)

        vectors = [(_as_vector(a), _as_vector(b)) for a, b in zip(h0, h1, strict=True)]
        d = len(vectors[0][0]) if vectors else 1

        if any(len(a) != d or len(b) != d for a, b in vectors):
            msg = "every slot vector must have the same length"
            raise ValueError(msg)

        return cls(m, d, np.array(vectors, dtype=np.int64).reshape(-1, 2, d))

    @property
    def n(self) -> int:
        return int(self._hashes.shape[0])

    @property
    def m(self) -> int:
        return self._m

    @property
    def d(self) -> int:
        return self._d

    @property
    def hashes(self) -> SlotArray:
        return self._hashes

    def slots(self, item: int, side: int) -> SlotVector:
        return tuple(int(x) for x in self._hashes[item, side])

    def slot_table(self) -> list[list[list[int]]]:
        """hashes as nested lists, for the pure Python graph code."""
        return cast(list[list[list[int]]], self._hashes.tolist())

    def subset(self, items: Iterable[int]) -> "Instance":
        """Sub-instance over the given items, renumbered in the given order."""
        index = list(items)
        return Instance(self._m, self._d, self._hashes[index] if index else np.empty((0, 2, self._d), np.int64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented

        return self._m == other._m and self._d == other._d and np.array_equal(self._hashes, other._hashes)

    def __hash__(self) -> int:
        return hash((self._m, self._d, self._hashes.shape, self._hashes.tobytes()))

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, m={self._m}, d={self._d})"


def _as_vector(value: int | Sequence[int]) -> SlotVector:
    if isinstance(value, int | np.integer):
        return (int(value),)

    return tuple(int(x) for x in value)


@dataclass(frozen=True)
class Placement:
    """Side chosen for each placed item. A placement covering only some items is partial."""

    sides: Mapping[int, Side] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(s not in SIDES for s in self.sides.values()):
            msg = "sides must be 0 or 1"
            raise ValueError(msg)

        object.__setattr__(self, "sides", MappingProxyType(dict(self.sides)))

    @classmethod
    def of(cls, sides: Sequence[int]) -> "Placement":
        """Full placement from a side per item in index order."""
        return cls({i: cast(Side, s) for i, s in enumerate(sides)})

    def __len__(self) -> int:
        return len(self.sides)

    def side_of(self, item: int) -> Side:
        return self.sides[item]

    def is_complete(self, n: int) -> bool:
        return len(self.sides) == n and all(i in self.sides for i in range(n))

    def as_tuple(self) -> tuple[Side, ...]:
        return tuple(self.sides[i] for i in sorted(self.sides))

    def restrict(self, items: Iterable[int]) -> "Placement":
        keep = set(items)
        return Placement({i: s for i, s in self.sides.items() if i in keep})

    def merge(self, other: "Placement") -> "Placement":
        if overlap := self.sides.keys() & other.sides.keys():
            msg = f"items placed twice: {sorted(overlap)}"
            raise ValueError(msg)

        return Placement({**self.sides, **other.sides})

    def occupancy(self, inst: Instance) -> Occupancy:
        """(side, slot) -> item. When a slot is claimed twice the first claimant is kept."""
        occupied: Occupancy = {}
        for item in sorted(self.sides):
            side = self.sides[item]
            for slot in inst.slots(item, side):
                occupied.setdefault((side, slot), item)

        return occupied


class Conflict(NamedTuple):
    """Two item-copies claiming one slot. first == second for a self-duplicate."""

    side: int
    slot: int
    first: int
    second: int


def sample_instance(n: int, m: int, d: int, seed: Seed, trial: int = 0) -> Instance:
    """Each of the 2*n*d slot indices is an independent uniform draw from [0, m),
    deterministic in (n, m, d, seed, trial)."""
    if n < 0:
        msg = f"n must be non-negative, got {n}"
        raise ValueError(msg)

    if m < 1 or d < 1:
        msg = f"m and d must be positive, got m={m}, d={d}"
        raise ValueError(msg)

    hashes = nb_sample_hashes(n, m, d, np.uint64(seed.master), np.uint64(trial & MASK64))

    return Instance(m, d, hashes)


def conflicts(inst: Instance, p: Placement) -> list[Conflict]:
    """Every clash among the placed items, in (side, slot) order."""
    claims: dict[tuple[int, int], list[int]] = {}
    for item, side in p.sides.items():
        for slot in inst.slots(item, side):
            claims.setdefault((side, slot), []).append(item)

    found: list[Conflict] = []
    for (side, slot), items in sorted(claims.items()):
        found.extend(Conflict(side, slot, items[0], other) for other in items[1:])

    return found


def is_legal(inst: Instance, p: Placement, *, partial: bool = False) -> bool:
    """True iff no (side, slot) is claimed by two item-copies, including two
    copies of the same item. Unless partial is set p must place every item."""
    if not partial and not p.is_complete(inst.n):
        msg = f"placement covers {len(p)} of {inst.n} items"
        raise ValueError(msg)

    occupied: set[tuple[int, int]] = set()
    for item, side in p.sides.items():
        for slot in inst.slots(item, side):
            if (side, slot) in occupied:
                return False
            occupied.add((side, slot))

    return True


def emit_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {inst.m} {inst.d}"]
    lines.extend(" ".join(str(x) for x in row) for row in inst.hashes.reshape(inst.n, 2 * inst.d).tolist())

    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    """Parses the canonical format: a header line `n m d`, then one line per item
    with the d slots of h_0 followed by the d slots of h_1. Single spaces, LF line endings."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    if not lines:
        raise InstanceFormatError("missing header", 1)

    header = _parse_fields(lines[0], 1)
    if len(header) != 3:  # noqa: PLR2004
        raise InstanceFormatError(f"malformed header, expected 'n m d' but found {len(header)} fields", 1)

    n, m, d = header
    if n < 0 or m < 1 or d < 1:
        raise InstanceFormatError(f"malformed header, need n >= 0, m >= 1, d >= 1 but found {n} {m} {d}", 1)

    if len(lines) - 1 != n:
        raise InstanceFormatError(f"expected {n} item lines, found {len(lines) - 1}", min(len(lines), n + 1) + 1)

    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = _parse_fields(line, line_no)
        if len(fields) != 2 * d:
            raise InstanceFormatError(f"expected {2 * d} fields, found {len(fields)}", line_no)

        for value in fields:
            if value >= m:
                raise InstanceFormatError(f"index {value} ≥ m={m}", line_no)
            if value < 0:
                raise InstanceFormatError(f"index {value} < 0", line_no)

        rows.append(fields)

    return Instance(m, d, np.array(rows, dtype=np.int64).reshape(n, 2, d) if rows else np.empty((0, 2, d), np.int64))


def _parse_fields(line: str, line_no: int) -> list[int]:
    if line != line.strip() or "  " in line or "\t" in line or "\r" in line:
        raise InstanceFormatError("stray whitespace", line_no)

    values = []
    for token in line.split(" "):
        try:
            value = int(token)
        except ValueError:
            raise InstanceFormatError(f"invalid integer {token!r}", line_no) from None

        if str(value) != token:
            raise InstanceFormatError(f"non-canonical integer {token!r}", line_no)

        values.append(value)

    return values
