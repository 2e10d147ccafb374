"""Rule set construction: every (source granule, target granule) pair with
its confidence, held as a dense matrix.

Confidence of a rule g => g' is the fraction of the rectangle
extension(g) x extension(g') covered by the relation.  Only the integer pair
counts are stored; the float confidence matrix is derived from them, so no
rounding accumulates anywhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .core import (
    SOURCE,
    TARGET,
    AttributeSchema,
    Bitset,
    Granule,
    InformationSystem,
    MMER,
    bitset_to_bool,
)
from .errors import NoGranulesError, StoreFormatError
from .granulation import GranuleSet, enumerate_granules

STORE_FORMAT = "granrec-rulestore"
STORE_VERSION = 1

# Items-side condition cap; the user side is small enough to go uncapped.
DEFAULT_TARGET_ATTR_CAP = 4


@dataclass(frozen=True)
class GranularRule:
    """One mined rule: user granule implies item granule."""

    source: Granule
    target: Granule
    pair_count: int

    @property
    def confidence(self) -> float:
        return self.pair_count / (self.source.size * self.target.size)


@dataclass(frozen=True, eq=False)
class RuleStore:
    """All rules over the admitted granules of both sides.

    ``pair_counts[i, j]`` is the number of relation pairs inside the
    rectangle of source granule i and target granule j; dividing by the
    rectangle size gives the rule's confidence.
    """

    source_granules: GranuleSet
    target_granules: GranuleSet
    pair_counts: np.ndarray
    n_users: int
    n_items: int

    def __post_init__(self):
        counts = np.ascontiguousarray(self.pair_counts, dtype=np.int64)
        counts.flags.writeable = False
        object.__setattr__(self, "pair_counts", counts)
        shape = (len(self.source_granules), len(self.target_granules))
        if counts.shape != shape:
            raise ValueError(f"pair_counts shape {counts.shape}, expected {shape}")
        if counts.min(initial=0) < 0:
            raise ValueError("negative pair count")
        limits = np.outer(self.source_sizes, self.target_sizes)
        if (counts > limits).any():
            raise ValueError("pair count exceeds its granule rectangle")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RuleStore):
            return NotImplemented
        return (
            self.source_granules == other.source_granules
            and self.target_granules == other.target_granules
            and self.n_users == other.n_users
            and self.n_items == other.n_items
            and np.array_equal(self.pair_counts, other.pair_counts)
        )

    @property
    def ms(self) -> float:
        return self.source_granules.threshold

    @property
    def mt(self) -> float:
        return self.target_granules.threshold

    @cached_property
    def source_sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.source_granules], dtype=np.int64)

    @cached_property
    def target_sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.target_granules], dtype=np.int64)

    @cached_property
    def confidence_matrix(self) -> np.ndarray:
        conf = self.pair_counts / np.outer(self.source_sizes, self.target_sizes)
        conf.flags.writeable = False
        return conf

    def rule_confidence(self, i: int, j: int) -> float:
        if not 0 <= i < len(self.source_granules):
            raise IndexError(f"source index {i} out of range")
        if not 0 <= j < len(self.target_granules):
            raise IndexError(f"target index {j} out of range")
        return float(self.confidence_matrix[i, j])

    def rule(self, i: int, j: int) -> GranularRule:
        self.rule_confidence(i, j)  # range check
        return GranularRule(
            self.source_granules[i],
            self.target_granules[j],
            int(self.pair_counts[i, j]),
        )


# Sweeps retrain on the same tables many times (the item table never changes
# across user-side splits); memoizing enumeration by value makes that cheap.
_enumerate_cached = lru_cache(maxsize=16)(enumerate_granules)


def _extension_matrix(granules, width: int) -> np.ndarray:
    out = np.zeros((len(granules), width), dtype=np.float32)
    for i, g in enumerate(granules):
        out[i] = bitset_to_bool(g.extension, width)
    return out


def train(
    es: MMER,
    ms: float,
    mt: float,
    *,
    max_source_attrs: int | None = None,
    max_target_attrs: int | None = DEFAULT_TARGET_ATTR_CAP,
    allow_absence: bool = False,
) -> RuleStore:
    """Mine every rule over the granules admitted by the coverage thresholds.

    The pair-count matrix is computed as two matrix products
    (sources x relation x targets); float32 accumulation is exact here
    because every partial sum is an integer below 2**24.
    """
    sg = _enumerate_cached(es.users, ms, SOURCE, max_attrs=max_source_attrs,
                           allow_absence=allow_absence)
    tg = _enumerate_cached(es.items, mt, TARGET, max_attrs=max_target_attrs,
                           allow_absence=allow_absence)
    if not sg.granules:
        raise NoGranulesError(SOURCE, ms)
    if not tg.granules:
        raise NoGranulesError(TARGET, mt)

    n_users, n_items = es.users.n_objects, es.items.n_objects
    dtype = np.float32 if n_users * n_items < 2**24 else np.float64
    rel = es.relation.to_bool_matrix().astype(dtype)
    tgt = _extension_matrix(tg.granules, n_items).astype(dtype)
    src = _extension_matrix(sg.granules, n_users).astype(dtype)
    per_user = rel @ tgt.T
    counts = np.rint(src @ per_user).astype(np.int64)
    return RuleStore(sg, tg, counts, n_users, n_items)


def _schema_to_json(schema: AttributeSchema) -> dict:
    return {
        "names": list(schema.names),
        "domains": [list(d) for d in schema.domains],
        "multivalued_group": sorted(schema.multivalued_group),
    }


def _schema_from_json(obj: dict) -> AttributeSchema:
    return AttributeSchema(
        names=tuple(obj["names"]),
        domains=tuple(tuple(d) for d in obj["domains"]),
        multivalued_group=frozenset(obj["multivalued_group"]),
    )


def _side_to_json(granules: GranuleSet, universe_size: int) -> dict:
    schema = granules.schema
    return {
        "threshold": granules.threshold,
        "universe_size": universe_size,
        "schema": _schema_to_json(schema),
        "granules": [
            {
                "conditions": [
                    [schema.names[a], schema.domains[a][v]]
                    for a, v in zip(g.attrs, g.values)
                ],
                "extension": format(g.extension, "x"),
            }
            for g in granules
        ],
    }


def _side_from_json(obj: dict, side: str) -> GranuleSet:
    schema = _schema_from_json(obj["schema"])
    universe = int(obj["universe_size"])
    granules = []
    for entry in obj["granules"]:
        attrs, values = [], []
        for name, value in entry["conditions"]:
            a = schema.index(name)
            v = schema.value_index(a, value)
            if v is None:
                raise StoreFormatError(
                    f"granule condition {name}={value} not in the stored domain"
                )
            attrs.append(a)
            values.append(v)
        granules.append(
            Granule(side, tuple(attrs), tuple(values),
                    int(entry["extension"], 16), universe)
        )
    return GranuleSet(side, float(obj["threshold"]), schema, tuple(granules))


def save_store(store: RuleStore, path: str | Path) -> None:
    """Write the store as versioned JSON; integers only, so loading it back
    reproduces the store bit-exactly."""
    doc = {
        "format": STORE_FORMAT,
        "version": STORE_VERSION,
        "ms": store.ms,
        "mt": store.mt,
        "source": _side_to_json(store.source_granules, store.n_users),
        "target": _side_to_json(store.target_granules, store.n_items),
        "pair_counts": store.pair_counts.tolist(),
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n")


def load_store(path: str | Path) -> RuleStore:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise StoreFormatError(f"{path}: cannot read store ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise StoreFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != STORE_FORMAT:
        raise StoreFormatError(f"{path}: not a {STORE_FORMAT} file")
    if doc.get("version") != STORE_VERSION:
        raise StoreFormatError(
            f"{path}: unsupported version {doc.get('version')!r}"
        )
    try:
        source = _side_from_json(doc["source"], SOURCE)
        target = _side_from_json(doc["target"], TARGET)
        counts = np.array(doc["pair_counts"], dtype=np.int64)
        counts = counts.reshape(len(source), len(target))
        return RuleStore(
            source,
            target,
            counts,
            int(doc["source"]["universe_size"]),
            int(doc["target"]["universe_size"]),
        )
    except StoreFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StoreFormatError(f"{path}: malformed store ({exc})") from exc
