"""Top-k recommendation against a trained rule store.

For one user, every source granule the user matches contributes its row of
rule confidences; per target granule only the strongest matching rule
survives, and the k strongest distinct targets are returned.  Zero-confidence
targets are never recommended: a short list beats suggesting item groups no
training user ever touched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    AttributeSchema,
    Bitset,
    Granule,
    InformationSystem,
    bitset_to_bool,
    extension,
)
from .errors import SchemaMismatchError
from .rules import RuleStore


@dataclass(frozen=True)
class RecommendationEntry:
    target_index: int
    target: Granule
    confidence: float


@dataclass(frozen=True)
class Recommendation:
    """Ranked distinct target granules for one user, strongest first."""

    user: int
    entries: tuple[RecommendationEntry, ...]
    target_schema: AttributeSchema

    def conditions(self) -> list[str]:
        return [
            self.target_schema.condition_string(e.target.attrs, e.target.values)
            for e in self.entries
        ]


def _top_k(store: RuleStore, matched: np.ndarray, k: int):
    """Best-k (target, confidence) pairs over the matched source rows.

    Ties are broken toward the canonical (enumeration) order of target
    granules, which a stable sort on descending confidence gives for free.
    Confidences are exact here: they are single correctly-rounded quotients
    of integers, and with rectangle sizes below 2**26 no two distinct
    rational confidences collapse to the same double.
    """
    if matched.size == 0:
        return ()
    best = store.confidence_matrix[matched].max(axis=0)
    order = np.argsort(-best, kind="stable")
    entries = []
    for j in order:
        if len(entries) == k or best[j] <= 0.0:
            break
        entries.append(
            RecommendationEntry(int(j), store.target_granules[int(j)], float(best[j]))
        )
    return tuple(entries)


def profile_to_indices(
    schema: AttributeSchema, profile: Mapping[str, str]
) -> tuple[int | None, ...]:
    """Translate a raw attribute=value mapping into domain value indices.

    Unknown attribute names are rejected; unseen values map to None, which
    matches no granule condition on that attribute.
    """
    unknown = set(profile) - set(schema.names)
    if unknown:
        raise SchemaMismatchError(
            f"profile attributes not in the trained schema: {sorted(unknown)}"
        )
    return tuple(
        schema.value_index(j, profile[name]) if name in profile else None
        for j, name in enumerate(schema.names)
    )


def recommend(
    store: RuleStore, profile: Mapping[str, str], k: int, *, user: int = 0
) -> Recommendation:
    """Top-k target granules for a single (possibly never seen) user profile."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    values = profile_to_indices(store.source_granules.schema, profile)
    matched = np.array(
        [
            i
            for i, g in enumerate(store.source_granules)
            if all(values[a] == v for a, v in zip(g.attrs, g.values))
        ],
        dtype=np.intp,
    )
    return Recommendation(user, _top_k(store, matched, k),
                          store.target_granules.schema)


def recommend_rows(
    store: RuleStore, users: InformationSystem, k: int
) -> list[Recommendation]:
    """Recommendations for every row of a user table sharing the trained
    schema.  Matching is done in bulk by re-extending each source granule
    over the given table."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if users.schema != store.source_granules.schema:
        raise SchemaMismatchError("user table schema differs from the trained schema")
    n = users.n_objects
    match_matrix = np.zeros((len(store.source_granules), n), dtype=bool)
    for i, g in enumerate(store.source_granules):
        ext = extension(users, g.attrs, g.values)
        if ext:
            match_matrix[i] = bitset_to_bool(ext, n)
    schema = store.target_granules.schema
    return [
        Recommendation(u, _top_k(store, np.nonzero(match_matrix[:, u])[0], k), schema)
        for u in range(n)
    ]


def recommended_items(rec: Recommendation, item_universe: InformationSystem) -> Bitset:
    """Union of the recommended granules' extensions over the given item
    table.  Extensions are recomputed here because at evaluation time the
    item universe may not be the one the store was trained on."""
    if item_universe.schema != rec.target_schema:
        raise SchemaMismatchError("item table schema differs from the trained schema")
    bits = 0
    for entry in rec.entries:
        bits |= extension(item_universe, entry.target.attrs, entry.target.values)
    return bits
