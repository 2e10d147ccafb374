"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately naive: per-row scans, nested loops over
object pairs, exhaustive subset enumeration, exact Fraction arithmetic.
None of it shares code with the library paths it checks.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from granrec.core import MMER, BinaryRelation, InformationSystem


def extension_scan(system: InformationSystem, attrs, values) -> int:
    bits = 0
    for i, row in enumerate(system.rows):
        if all(row[a] == v for a, v in zip(attrs, values)):
            bits |= 1 << i
    return bits


def pair_count_loops(rel: BinaryRelation, lh: int, rh: int) -> int:
    total = 0
    for i in range(rel.n_left):
        for j in range(rel.n_right):
            if (lh >> i) & 1 and (rh >> j) & 1 and (rel.rows[i] >> j) & 1:
                total += 1
    return total


def allowed_value_indices(system: InformationSystem, attr: int, allow_absence: bool):
    schema = system.schema
    if not allow_absence and schema.names[attr] in schema.multivalued_group:
        return [i for i, v in enumerate(schema.domains[attr]) if v == "1"]
    return list(range(len(schema.domains[attr])))


def enumerate_bruteforce(
    system: InformationSystem,
    threshold: float,
    *,
    max_attrs: int | None = None,
    allow_absence: bool = False,
):
    """Every (attrs, values, extension) whose coverage clears the threshold,
    from exhaustive enumeration of all non-empty attribute subsets and all
    value vectors, in canonical order."""
    n = system.n_objects
    m = system.schema.width
    cap = m if max_attrs is None else min(m, max_attrs)
    found = []
    for size in range(1, cap + 1):
        for attrs in combinations(range(m), size):
            value_choices = [allowed_value_indices(system, a, allow_absence)
                             for a in attrs]
            for values in product(*value_choices):
                ext = extension_scan(system, attrs, values)
                if ext.bit_count() / n >= threshold:
                    found.append((attrs, values, ext))
    found.sort(key=lambda t: (len(t[0]), t[0], t[1]))
    return found


def confidence_exact(rel: BinaryRelation, lh: int, rh: int) -> Fraction:
    denom = lh.bit_count() * rh.bit_count()
    return Fraction(pair_count_loops(rel, lh, rh), denom)


def confidence_matrix_bruteforce(
    es: MMER,
    ms: float,
    mt: float,
    *,
    max_source_attrs: int | None = None,
    max_target_attrs: int | None = None,
    allow_absence: bool = False,
):
    """Source granules, target granules and the exact confidence of every
    rule, all recomputed from scratch."""
    sources = enumerate_bruteforce(es.users, ms, max_attrs=max_source_attrs,
                                   allow_absence=allow_absence)
    targets = enumerate_bruteforce(es.items, mt, max_attrs=max_target_attrs,
                                   allow_absence=allow_absence)
    matrix = [
        [confidence_exact(es.relation, s_ext, t_ext) for (_, _, t_ext) in targets]
        for (_, _, s_ext) in sources
    ]
    return sources, targets, matrix


def topk_from_matrix(sources, targets, matrix, profile_row, k: int):
    """Ranked (target attrs, target values, exact confidence) for one user
    row: full scan over all rules of matched sources, per-target maximum,
    descending confidence with canonical tie-break, positive only."""
    best: dict[int, Fraction] = {}
    for i, (attrs, values, _) in enumerate(sources):
        if not all(profile_row[a] == v for a, v in zip(attrs, values)):
            continue
        for j in range(len(targets)):
            if j not in best or matrix[i][j] > best[j]:
                best[j] = matrix[i][j]
    ranked = sorted(
        ((j, conf) for j, conf in best.items() if conf > 0),
        key=lambda item: (-item[1], len(targets[item[0]][0]),
                          targets[item[0]][0], targets[item[0]][1]),
    )
    return [(targets[j][0], targets[j][1], conf) for j, conf in ranked[:k]]


def topk_bruteforce(es: MMER, ms: float, mt: float, profile_row, k: int,
                    **kwargs):
    sources, targets, matrix = confidence_matrix_bruteforce(es, ms, mt, **kwargs)
    return topk_from_matrix(sources, targets, matrix, profile_row, k)
