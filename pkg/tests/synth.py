"""Synthetic MMER generators for tests: small random instances for oracle
comparison and a structured generator whose ratings actually depend on
attributes, so cold-start trends are observable at toy scale."""
from __future__ import annotations

import numpy as np

from granrec.core import MMER, AttributeSchema, BinaryRelation, InformationSystem


def random_system(rng, n_objects, domain_sizes, prefix="a",
                  multivalued=()) -> InformationSystem:
    names = tuple(f"{prefix}{j}" for j in range(len(domain_sizes)))
    domains = tuple(
        tuple(f"v{i}" for i in range(size)) if name not in multivalued
        else ("0", "1")
        for name, size in zip(names, domain_sizes)
    )
    schema = AttributeSchema(names=names, domains=domains,
                             multivalued_group=frozenset(multivalued))
    rows = tuple(
        tuple(int(rng.integers(len(domains[j]))) for j in range(len(names)))
        for _ in range(n_objects)
    )
    return InformationSystem(schema, rows)


def random_mmer(rng, n_users, n_items, user_domains=(2, 3), item_domains=(2, 2),
                density=0.3) -> MMER:
    users = random_system(rng, n_users, user_domains, prefix="a")
    items = random_system(rng, n_items, item_domains, prefix="b")
    rows = tuple(
        int(
            sum(
                1 << j
                for j in range(n_items)
                if rng.random() < density
            )
        )
        for _ in range(n_users)
    )
    return MMER(users, items, BinaryRelation(n_users, n_items, rows))


def structured_mmer(rng, n_users=120, n_items=160, n_genres=8,
                    target_density=0.06) -> MMER:
    """Ratings driven by a planted (user attributes x genre) preference
    table, with the base rate tuned to the requested density."""
    user_domains = (5, 2, 6)  # age group, gender, occupation
    users = random_system(rng, n_users, user_domains, prefix="u")

    item_names = ("decade",) + tuple(f"g{i}" for i in range(n_genres))
    item_domains = (("d0", "d1", "d2"),) + (("0", "1"),) * n_genres
    item_schema = AttributeSchema(
        names=item_names,
        domains=item_domains,
        multivalued_group=frozenset(item_names[1:]),
    )
    item_rows = []
    for _ in range(n_items):
        flags = (rng.random(n_genres) < 0.25).astype(int)
        if not flags.any():
            flags[int(rng.integers(n_genres))] = 1
        item_rows.append((int(rng.integers(3)),) + tuple(int(f) for f in flags))
    items = InformationSystem(item_schema, tuple(item_rows))

    # Per attribute value, a taste vector over genres; users sum the vectors
    # of their own values.
    tastes = {
        (j, v): rng.normal(0.0, 2.0, size=n_genres)
        for j, size in enumerate(user_domains)
        for v in range(size)
    }
    genre_matrix = np.array([row[1:] for row in item_rows], dtype=float)
    logits = np.zeros((n_users, n_items))
    for u, row in enumerate(users.rows):
        taste = sum(tastes[(j, v)] for j, v in enumerate(row))
        logits[u] = genre_matrix @ taste / max(1.0, np.sqrt(n_genres))

    lo, hi = -30.0, 30.0
    for _ in range(60):  # bisect the bias so mean probability hits the target
        mid = (lo + hi) / 2
        if (1.0 / (1.0 + np.exp(-(logits + mid)))).mean() > target_density:
            hi = mid
        else:
            lo = mid
    probs = 1.0 / (1.0 + np.exp(-(logits + (lo + hi) / 2)))
    dense = rng.random((n_users, n_items)) < probs
    rows = tuple(
        int(sum(1 << j for j in range(n_items) if dense[u, j]))
        for u in range(n_users)
    )
    return MMER(users, items, BinaryRelation(n_users, n_items, rows))
