"""Dataset ingestion: the MovieLens 100k raw files and a generic CSV format.

MovieLens preprocessing: ratings are binarized to rated/not-rated, user age
is discretized to nine intervals, release year to three (before the 1970s,
1970s-1980s, 1990s), and the multi-valued genre is scaled to 18 boolean
attributes (the raw data's extra "unknown" flag is dropped).
"""
from __future__ import annotations

import csv
import logging
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .core import AttributeSchema, BinaryRelation, InformationSystem, MMER
from .errors import DataFormatError

logger = logging.getLogger(__name__)

# Upper-exclusive age cut points; eight cuts make the nine intervals.
DEFAULT_AGE_CUTS = (18, 25, 30, 35, 40, 45, 50, 56)

# Release-year cuts: before the 1970s / 1970s-1980s / 1990s.
DEFAULT_YEAR_CUTS = (1970, 1990)
YEAR_LABELS = ("before-1970s", "1970s-1980s", "1990s")

GENRES = (
    "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
)

MONTHS = {
    "Jan": 1, "Feb": 2, "Mar": 3, "Apr": 4, "May": 5, "Jun": 6,
    "Jul": 7, "Aug": 8, "Sep": 9, "Oct": 10, "Nov": 11, "Dec": 12,
}


@dataclass(frozen=True)
class MovieLensConfig:
    data_dir: Path
    age_cuts: tuple[int, ...] = DEFAULT_AGE_CUTS
    year_cuts: tuple[int, ...] = DEFAULT_YEAR_CUTS
    genre_mode: str = "presence-only"  # or "full"

    def __post_init__(self):
        object.__setattr__(self, "data_dir", Path(self.data_dir))
        if any(b <= a for a, b in zip(self.age_cuts, self.age_cuts[1:])):
            raise ValueError("age cuts must be strictly ascending")
        if len(self.year_cuts) != 2 or self.year_cuts[0] >= self.year_cuts[1]:
            raise ValueError("exactly two ascending year cuts expected")
        if self.genre_mode not in ("presence-only", "full"):
            raise ValueError(f"unknown genre_mode {self.genre_mode!r}")

    @property
    def age_labels(self) -> tuple[str, ...]:
        cuts = self.age_cuts
        labels = [f"[0,{cuts[0] - 1}]"]
        labels += [f"[{lo},{hi - 1}]" for lo, hi in zip(cuts, cuts[1:])]
        labels.append(f"[{cuts[-1]},+)")
        return tuple(labels)


def _read_lines(path: Path, encoding: str = "utf-8"):
    if not path.is_file():
        raise DataFormatError("file not found", path=path)
    text = path.read_text(encoding=encoding)
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield line_no, line


def _parse_year(date_field: str, path: Path, line_no: int) -> int | None:
    """Release dates look like 01-Jan-1995; empty means undated."""
    if not date_field:
        return None
    parts = date_field.split("-")
    if len(parts) != 3 or parts[1] not in MONTHS or not parts[2].isdigit():
        raise DataFormatError(
            f"unparseable release date {date_field!r}", path=path, line=line_no
        )
    return int(parts[2])


def load_movielens(cfg: MovieLensConfig) -> MMER:
    """Build an MMER from a MovieLens 100k directory (u.user, u.item, u.data)."""
    age_labels = cfg.age_labels

    # Users: id|age|gender|occupation|zip, ordered by id.
    user_path = cfg.data_dir / "u.user"
    parsed_users: dict[int, tuple[int, str, str]] = {}
    for line_no, line in _read_lines(user_path):
        fields = line.split("|")
        if len(fields) < 4:
            raise DataFormatError("expected id|age|gender|occupation|zip",
                                  path=user_path, line=line_no)
        try:
            uid, age = int(fields[0]), int(fields[1])
        except ValueError:
            raise DataFormatError("non-numeric user id or age",
                                  path=user_path, line=line_no) from None
        if uid in parsed_users:
            raise DataFormatError(f"duplicate user id {uid}",
                                  path=user_path, line=line_no)
        parsed_users[uid] = (age, fields[2], fields[3])
    if not parsed_users:
        raise DataFormatError("no users found", path=user_path)
    if set(parsed_users) != set(range(1, len(parsed_users) + 1)):
        raise DataFormatError("user ids are not 1..N", path=user_path)

    genders = tuple(sorted({g for _, g, _ in parsed_users.values()}))
    occupations = tuple(sorted({o for _, _, o in parsed_users.values()}))
    user_schema = AttributeSchema(
        names=("age", "gender", "occupation"),
        domains=(age_labels, genders, occupations),
    )
    user_rows = tuple(
        (
            bisect_right(cfg.age_cuts, parsed_users[uid][0]),
            genders.index(parsed_users[uid][1]),
            occupations.index(parsed_users[uid][2]),
        )
        for uid in range(1, len(parsed_users) + 1)
    )
    users = InformationSystem(user_schema, user_rows)

    # Movies: id|title|release-date|video-date|url|19 genre flags.
    item_path = cfg.data_dir / "u.item"
    parsed_items: dict[int, tuple[int | None, tuple[int, ...]]] = {}
    for line_no, line in _read_lines(item_path, encoding="latin-1"):
        fields = line.split("|")
        if len(fields) != 5 + 1 + len(GENRES):
            raise DataFormatError(
                f"expected {5 + 1 + len(GENRES)} pipe-separated fields, "
                f"got {len(fields)}",
                path=item_path, line=line_no,
            )
        try:
            mid = int(fields[0])
            flags = tuple(int(f) for f in fields[6:])  # drops the "unknown" flag
        except ValueError:
            raise DataFormatError("non-numeric movie id or genre flag",
                                  path=item_path, line=line_no) from None
        if any(f not in (0, 1) for f in flags):
            raise DataFormatError("genre flags must be 0 or 1",
                                  path=item_path, line=line_no)
        if mid in parsed_items:
            raise DataFormatError(f"duplicate movie id {mid}",
                                  path=item_path, line=line_no)
        parsed_items[mid] = (_parse_year(fields[2], item_path, line_no), flags)
    if not parsed_items:
        raise DataFormatError("no movies found", path=item_path)
    if set(parsed_items) != set(range(1, len(parsed_items) + 1)):
        raise DataFormatError("movie ids are not 1..N", path=item_path)

    undated = sum(1 for year, _ in parsed_items.values() if year is None)
    if undated:
        logger.warning(
            "%d movie(s) lack a release date; assigned to the %r interval "
            "to keep the item universe complete",
            undated, YEAR_LABELS[-1],
        )

    group = frozenset(GENRES) if cfg.genre_mode == "presence-only" else frozenset()
    item_schema = AttributeSchema(
        names=("release-decade",) + GENRES,
        domains=(YEAR_LABELS,) + (("0", "1"),) * len(GENRES),
        multivalued_group=group,
    )
    item_rows = []
    for mid in range(1, len(parsed_items) + 1):
        year, flags = parsed_items[mid]
        decade = len(YEAR_LABELS) - 1 if year is None else bisect_right(cfg.year_cuts, year)
        item_rows.append((decade,) + flags)
    items = InformationSystem(item_schema, tuple(item_rows))

    # Ratings: user item rating timestamp, tab-separated; any rating sets the bit.
    data_path = cfg.data_dir / "u.data"
    pairs = []
    for line_no, line in _read_lines(data_path):
        fields = line.split("\t")
        if len(fields) < 2:
            raise DataFormatError("expected user<TAB>item", path=data_path,
                                  line=line_no)
        try:
            uid, mid = int(fields[0]), int(fields[1])
        except ValueError:
            raise DataFormatError("non-numeric user or movie id",
                                  path=data_path, line=line_no) from None
        if not 1 <= uid <= len(parsed_users):
            raise DataFormatError(f"user id {uid} out of range",
                                  path=data_path, line=line_no)
        if not 1 <= mid <= len(parsed_items):
            raise DataFormatError(f"movie id {mid} out of range",
                                  path=data_path, line=line_no)
        pairs.append((uid - 1, mid - 1))
    relation = BinaryRelation.from_pairs(len(parsed_users), len(parsed_items), pairs)
    return MMER(users, items, relation)


def load_csv_mmer(users_path, items_path, relation_path) -> MMER:
    """Generic MMER ingestion: two headered entity CSVs (first column is the
    id, the rest are categorical attributes) and a relation CSV whose first
    two columns are (left id, right id).  Attribute domains are the sorted
    observed values, frozen from then on."""
    users, user_ids = _load_entity_csv(Path(users_path))
    items, item_ids = _load_entity_csv(Path(items_path))
    pairs = _load_relation_csv(Path(relation_path), user_ids, item_ids)
    relation = BinaryRelation.from_pairs(users.n_objects, items.n_objects, pairs)
    return MMER(users, items, relation)


def _load_entity_csv(path: Path) -> tuple[InformationSystem, dict[str, int]]:
    if not path.is_file():
        raise DataFormatError("file not found", path=path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", path=path) from None
        if len(header) < 2:
            raise DataFormatError("need an id column and at least one attribute",
                                  path=path)
        names = tuple(header[1:])
        ids: dict[str, int] = {}
        raw_rows: list[tuple[str, ...]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"expected {len(header)} columns, got {len(row)}",
                    path=path, line=line_no,
                )
            if row[0] in ids:
                raise DataFormatError(f"duplicate id {row[0]!r}", path=path,
                                      line=line_no)
            ids[row[0]] = len(raw_rows)
            raw_rows.append(tuple(row[1:]))
    if not raw_rows:
        raise DataFormatError("no data rows", path=path)
    domains = tuple(
        tuple(sorted({row[j] for row in raw_rows})) for j in range(len(names))
    )
    schema = AttributeSchema(names=names, domains=domains)
    rows = tuple(
        tuple(domains[j].index(row[j]) for j in range(len(names)))
        for row in raw_rows
    )
    return InformationSystem(schema, rows), ids


def _load_relation_csv(
    path: Path, left_ids: dict[str, int], right_ids: dict[str, int]
) -> list[tuple[int, int]]:
    if not path.is_file():
        raise DataFormatError("file not found", path=path)
    pairs = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            next(reader)  # header
        except StopIteration:
            raise DataFormatError("empty file", path=path) from None
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise DataFormatError("expected (left_id, right_id)", path=path,
                                      line=line_no)
            if row[0] not in left_ids:
                raise DataFormatError(f"unknown left id {row[0]!r}", path=path,
                                      line=line_no)
            if row[1] not in right_ids:
                raise DataFormatError(f"unknown right id {row[1]!r}", path=path,
                                      line=line_no)
            pairs.append((left_ids[row[0]], right_ids[row[1]]))
    return pairs


def export_csv_mmer(es: MMER, users_path, items_path, relation_path) -> None:
    """Write an MMER back out in the generic CSV format.  Object ids are the
    row indices; re-importing reproduces the same tables as long as every
    domain value occurs somewhere in the data."""
    _write_entity_csv(Path(users_path), es.users)
    _write_entity_csv(Path(items_path), es.items)
    with open(Path(relation_path), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["left_id", "right_id"])
        for i, bits in enumerate(es.relation.rows):
            j = 0
            while bits:
                if bits & 1:
                    writer.writerow([str(i), str(j)])
                bits >>= 1
                j += 1


def _write_entity_csv(path: Path, system: InformationSystem) -> None:
    schema = system.schema
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", *schema.names])
        for i, row in enumerate(system.rows):
            writer.writerow(
                [str(i), *(schema.domains[j][v] for j, v in enumerate(row))]
            )


def read_profiles(path) -> list[tuple[str, dict[str, str]]]:
    """User profiles for recommendation: a headered CSV whose first column is
    the user id and whose remaining columns are attribute values."""
    path = Path(path)
    if not path.is_file():
        raise DataFormatError("file not found", path=path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", path=path) from None
        if len(header) < 2:
            raise DataFormatError("need an id column and at least one attribute",
                                  path=path)
        out = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"expected {len(header)} columns, got {len(row)}",
                    path=path, line=line_no,
                )
            out.append((row[0], dict(zip(header[1:], row[1:]))))
    return out
