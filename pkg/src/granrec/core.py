"""Domain types for entity-relationship data: categorical tables, binary
relations, and granules, all backed by integer bitsets.

A bitset is a plain Python int: bit i stands for object i of the universe.
CPython evaluates AND/OR/popcount over machine words in C, which is what the
coverage and confidence arithmetic everywhere else relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import SchemaMismatchError

Bitset = int

SOURCE = "source"
TARGET = "target"
SIDES = (SOURCE, TARGET)


def bitset_from_indices(indices: Iterable[int]) -> Bitset:
    bits = 0
    for i in indices:
        bits |= 1 << i
    return bits


def bit_indices(bits: Bitset) -> Iterator[int]:
    """Yield the set bit positions in ascending order."""
    i = 0
    while bits:
        if bits & 1:
            yield i
        bits >>= 1
        i += 1


def bitset_to_bool(bits: Bitset, width: int) -> np.ndarray:
    """Unpack a bitset into a boolean vector of the given width."""
    raw = bits.to_bytes((width + 7) // 8 or 1, "little")
    unpacked = np.unpackbits(
        np.frombuffer(raw, dtype=np.uint8), bitorder="little", count=width
    )
    return unpacked.astype(bool)


def bitset_from_bool(mask: np.ndarray) -> Bitset:
    packed = np.packbits(mask.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


@dataclass(frozen=True)
class AttributeSchema:
    """Named categorical attributes with fixed, ordered value domains.

    ``multivalued_group`` tags boolean attributes scaled out of a single
    multi-valued attribute (e.g. genre flags); granule enumeration may
    restrict those to presence conditions.
    """

    names: tuple[str, ...]
    domains: tuple[tuple[str, ...], ...]
    multivalued_group: frozenset[str] = frozenset()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("attribute names must be unique")
        if len(self.domains) != len(self.names):
            raise ValueError("one domain per attribute required")
        for name, domain in zip(self.names, self.domains):
            if not domain:
                raise ValueError(f"attribute {name!r} has an empty domain")
            if len(set(domain)) != len(domain):
                raise ValueError(f"attribute {name!r} has duplicate domain values")
        unknown = self.multivalued_group - set(self.names)
        if unknown:
            raise ValueError(f"multivalued_group names not in schema: {sorted(unknown)}")

    @property
    def width(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaMismatchError(f"unknown attribute {name!r}") from None

    def value_index(self, attr: int, value: str) -> int | None:
        """Index of ``value`` in the attribute's domain, or None when unseen.

        Unseen values do not raise: domains are frozen at ingestion and a
        profile carrying a new value simply matches no granule on it.
        """
        try:
            return self.domains[attr].index(value)
        except ValueError:
            return None

    def condition_string(self, attrs: Sequence[int], values: Sequence[int]) -> str:
        """Render an intension as ``attr=value&attr=value``."""
        return "&".join(
            f"{self.names[a]}={self.domains[a][v]}" for a, v in zip(attrs, values)
        )


@dataclass(frozen=True)
class InformationSystem:
    """Objects-by-attributes table; cells hold indices into value domains."""

    schema: AttributeSchema
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("an information system needs at least one object")
        m = self.schema.width
        for i, row in enumerate(self.rows):
            if len(row) != m:
                raise ValueError(f"row {i} has {len(row)} cells, expected {m}")
            for j, v in enumerate(row):
                if not 0 <= v < len(self.schema.domains[j]):
                    raise ValueError(
                        f"row {i}, attribute {self.schema.names[j]!r}: "
                        f"value index {v} outside domain"
                    )

    @property
    def n_objects(self) -> int:
        return len(self.rows)

    @property
    def universe(self) -> Bitset:
        return (1 << len(self.rows)) - 1

    @cached_property
    def value_masks(self) -> tuple[tuple[Bitset, ...], ...]:
        """Per attribute, per value index: bitset of rows holding that value."""
        masks = [[0] * len(domain) for domain in self.schema.domains]
        for i, row in enumerate(self.rows):
            bit = 1 << i
            for j, v in enumerate(row):
                masks[j][v] |= bit
        return tuple(tuple(col) for col in masks)

    def subset(self, indices: Sequence[int]) -> InformationSystem:
        """New system over the given rows, sharing this schema."""
        return InformationSystem(self.schema, tuple(self.rows[i] for i in indices))


@dataclass(frozen=True)
class BinaryRelation:
    """Relation between two universes, one bitset over the right side per
    left object."""

    n_left: int
    n_right: int
    rows: tuple[Bitset, ...]

    def __post_init__(self):
        if len(self.rows) != self.n_left:
            raise ValueError(f"{self.n_left} rows expected, got {len(self.rows)}")
        limit = 1 << self.n_right
        for i, row in enumerate(self.rows):
            if not 0 <= row < limit:
                raise ValueError(f"row {i} has bits beyond width {self.n_right}")

    @classmethod
    def from_pairs(
        cls, n_left: int, n_right: int, pairs: Iterable[tuple[int, int]]
    ) -> BinaryRelation:
        rows = [0] * n_left
        for left, right in pairs:
            if not 0 <= left < n_left:
                raise ValueError(f"left index {left} outside [0, {n_left})")
            if not 0 <= right < n_right:
                raise ValueError(f"right index {right} outside [0, {n_right})")
            rows[left] |= 1 << right
        return cls(n_left, n_right, tuple(rows))

    @property
    def pair_total(self) -> int:
        return sum(row.bit_count() for row in self.rows)

    @property
    def density(self) -> float:
        cells = self.n_left * self.n_right
        return self.pair_total / cells if cells else 0.0

    def to_bool_matrix(self) -> np.ndarray:
        out = np.zeros((self.n_left, self.n_right), dtype=bool)
        for i, row in enumerate(self.rows):
            if row:
                out[i] = bitset_to_bool(row, self.n_right)
        return out

    def restrict_left(self, indices: Sequence[int]) -> BinaryRelation:
        return BinaryRelation(
            len(indices), self.n_right, tuple(self.rows[i] for i in indices)
        )

    def restrict_right(self, indices: Sequence[int]) -> BinaryRelation:
        cols = np.asarray(indices, dtype=np.intp)
        dense = self.to_bool_matrix()[:, cols]
        rows = tuple(bitset_from_bool(dense[i]) for i in range(self.n_left))
        return BinaryRelation(self.n_left, len(indices), rows)


@dataclass(frozen=True)
class MMER:
    """Many-to-many entity-relationship data: two categorical tables joined
    by a binary relation (users rate items)."""

    users: InformationSystem
    items: InformationSystem
    relation: BinaryRelation

    def __post_init__(self):
        if self.relation.n_left != self.users.n_objects:
            raise ValueError(
                f"relation has {self.relation.n_left} rows, "
                f"{self.users.n_objects} users"
            )
        if self.relation.n_right != self.items.n_objects:
            raise ValueError(
                f"relation width {self.relation.n_right} != "
                f"{self.items.n_objects} items"
            )


@dataclass(frozen=True)
class Granule:
    """An equivalence class named by its condition.

    ``attrs``/``values`` form the intension (a conjunction of attribute=value
    conditions), ``extension`` the set of objects satisfying it.  Attribute
    indices are kept strictly increasing so equal conditions are one granule
    regardless of which object induced them.
    """

    side: str
    attrs: tuple[int, ...]
    values: tuple[int, ...]
    extension: Bitset
    universe_size: int

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        if not self.attrs:
            raise ValueError("a granule needs at least one condition")
        if any(b <= a for a, b in zip(self.attrs, self.attrs[1:])):
            raise ValueError("attribute indices must be strictly increasing")
        if len(self.values) != len(self.attrs):
            raise ValueError("one value per attribute required")
        if not 0 <= self.extension < (1 << self.universe_size):
            raise ValueError("extension has bits beyond the universe")

    @property
    def size(self) -> int:
        return self.extension.bit_count()

    @property
    def coverage(self) -> float:
        return self.size / self.universe_size

    @property
    def sort_key(self) -> tuple:
        """Canonical order: fewer conditions first, then (attrs, values)."""
        return (len(self.attrs), self.attrs, self.values)


def extension(
    system: InformationSystem, attrs: Sequence[int], values: Sequence[int]
) -> Bitset:
    """Objects of ``system`` matching every (attribute, value) condition."""
    if len(attrs) != len(values):
        raise SchemaMismatchError("attrs and values must have equal length")
    bits = system.universe
    masks = system.value_masks
    for a, v in zip(attrs, values):
        if not 0 <= a < system.schema.width:
            raise SchemaMismatchError(f"attribute index {a} out of range")
        if not 0 <= v < len(system.schema.domains[a]):
            raise SchemaMismatchError(
                f"value index {v} outside domain of {system.schema.names[a]!r}"
            )
        bits &= masks[a][v]
        if not bits:
            break
    return bits


def make_granule(
    system: InformationSystem, attrs: Sequence[int], values: Sequence[int], side: str
) -> Granule:
    return Granule(
        side=side,
        attrs=tuple(attrs),
        values=tuple(values),
        extension=extension(system, attrs, values),
        universe_size=system.n_objects,
    )


def finer_than(g1: Granule, g2: Granule) -> bool:
    """True when g1 carries strictly more conditions than g2 and agrees with
    it on the shared ones (so g1's extension is contained in g2's)."""
    if g1.side != g2.side:
        raise ValueError(f"granules on different sides: {g1.side} vs {g2.side}")
    if len(g2.attrs) >= len(g1.attrs):
        return False
    g1_values = dict(zip(g1.attrs, g1.values))
    return all(a in g1_values and g1_values[a] == v for a, v in zip(g2.attrs, g2.values))


def pair_count(relation: BinaryRelation, lh: Bitset, rh: Bitset) -> int:
    """Number of relation pairs inside the rectangle lh x rh."""
    if lh.bit_length() > relation.n_left:
        raise ValueError("left bitset wider than the relation")
    if rh.bit_length() > relation.n_right:
        raise ValueError("right bitset wider than the relation")
    total = 0
    for i in bit_indices(lh):
        total += (relation.rows[i] & rh).bit_count()
    return total
