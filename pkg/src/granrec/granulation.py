"""Enumeration of all granules meeting a coverage threshold.

Candidates are generated level-wise over condition-set size, in the style of
frequent-itemset mining: a granule with conditions on attributes
(a1 < ... < aL) is only ever extended by attributes beyond aL, and any
candidate whose coverage falls below the threshold is dropped together with
its whole subtree.  The prune is sound because adding a condition can only
shrink an extension.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import AttributeSchema, Bitset, Granule, InformationSystem
from .errors import SchemaMismatchError


@dataclass(frozen=True)
class GranuleSet:
    """All granules of one side clearing a coverage threshold, in canonical
    order (fewer conditions first, then lexicographic on attrs and values)."""

    side: str
    threshold: float
    schema: AttributeSchema
    granules: tuple[Granule, ...]

    def __len__(self) -> int:
        return len(self.granules)

    def __iter__(self):
        return iter(self.granules)

    def __getitem__(self, i: int) -> Granule:
        return self.granules[i]


def _allowed_values(system: InformationSystem, attr: int, allow_absence: bool):
    """Candidate value indices for one attribute.

    Attributes in the schema's multivalued group are restricted to the
    presence value "1" unless absence conditions are explicitly allowed.
    """
    domain = system.schema.domains[attr]
    if not allow_absence and system.schema.names[attr] in system.schema.multivalued_group:
        try:
            return (domain.index("1"),)
        except ValueError:
            return ()
    return range(len(domain))


def enumerate_granules(
    system: InformationSystem,
    threshold: float,
    side: str,
    *,
    max_attrs: int | None = None,
    allow_absence: bool = False,
) -> GranuleSet:
    """All granules with non-empty condition sets whose coverage reaches
    ``threshold``.

    ``max_attrs`` caps the number of conditions per granule; None means no
    cap.  A threshold of 0 or below is rejected: it would enumerate every
    value combination down to single-object noise granules.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if max_attrs is not None and max_attrs < 1:
        raise ValueError(f"max_attrs must be positive, got {max_attrs}")

    n = system.n_objects
    m = system.schema.width
    masks = system.value_masks

    def keep(bits: Bitset) -> bool:
        return bits.bit_count() / n >= threshold

    level: list[Granule] = []
    for a in range(m):
        for v in _allowed_values(system, a, allow_absence):
            bits = masks[a][v]
            if keep(bits):
                level.append(Granule(side, (a,), (v,), bits, n))
    level.sort(key=lambda g: (g.attrs, g.values))

    out: list[Granule] = list(level)
    while level and (max_attrs is None or len(level[0].attrs) < max_attrs):
        nxt: list[Granule] = []
        for parent in level:
            last = parent.attrs[-1]
            for a in range(last + 1, m):
                for v in _allowed_values(system, a, allow_absence):
                    bits = parent.extension & masks[a][v]
                    if keep(bits):
                        nxt.append(
                            Granule(
                                side,
                                parent.attrs + (a,),
                                parent.values + (v,),
                                bits,
                                n,
                            )
                        )
        nxt.sort(key=lambda g: (g.attrs, g.values))
        out.extend(nxt)
        level = nxt

    return GranuleSet(side, threshold, system.schema, tuple(out))


def match(granule: Granule, system: InformationSystem, row: int) -> bool:
    """Does the given object satisfy every condition of the granule?"""
    if not 0 <= row < system.n_objects:
        raise IndexError(f"row {row} outside [0, {system.n_objects})")
    cells = system.rows[row]
    for a, v in zip(granule.attrs, granule.values):
        if a >= system.schema.width or v >= len(system.schema.domains[a]):
            raise SchemaMismatchError(
                "granule refers to attributes or values this schema lacks"
            )
        if cells[a] != v:
            return False
    return True
