import numpy as np
import pytest

from granrec.core import AttributeSchema, InformationSystem, extension, make_granule
from granrec.errors import SchemaMismatchError
from granrec.granulation import enumerate_granules, match

from oracles import enumerate_bruteforce
from synth import random_system


def as_keys(granule_set):
    return [(g.attrs, g.values, g.extension) for g in granule_set]


class TestEnumerate:
    def test_gender_granules_by_threshold(self, user_table):
        # Three of four users are M: at a low threshold both gender granules
        # survive, at 0.5 only the majority one does.
        low = enumerate_granules(user_table, 0.2, "source", max_attrs=1)
        gender = user_table.schema.index("gender")
        gender_granules = [g for g in low if g.attrs == (gender,)]
        assert [g.values for g in gender_granules] == [(0,), (1,)]
        high = enumerate_granules(user_table, 0.5, "source", max_attrs=1)
        gender_granules = [g for g in high if g.attrs == (gender,)]
        assert [g.values for g in gender_granules] == [(1,)]

    def test_threshold_one_keeps_only_constant_attributes(self):
        schema = AttributeSchema(names=("const", "varies"),
                                 domains=(("x",), ("p", "q")))
        system = InformationSystem(schema, ((0, 0), (0, 1), (0, 0)))
        gs = enumerate_granules(system, 1.0, "source")
        assert as_keys(gs) == [((0,), (0,), 0b111)]

    def test_threshold_one_no_constant_attribute(self):
        schema = AttributeSchema(names=("a",), domains=(("p", "q"),))
        system = InformationSystem(schema, ((0,), (1,)))
        assert len(enumerate_granules(system, 1.0, "source")) == 0

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(5)
        system = random_system(rng, 12, (2, 3, 2, 2))
        gs = enumerate_granules(system, 0.25, "source")
        oracle = enumerate_bruteforce(system, 0.25)
        assert as_keys(gs) == oracle

    def test_pruning_sound_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(2, 31))
            n_attrs = int(rng.integers(1, 6))
            domains = tuple(int(rng.integers(2, 4)) for _ in range(n_attrs))
            system = random_system(rng, n, domains)
            threshold = float(rng.choice([0.1, 0.2, 1 / 3, 0.5, 0.75]))
            gs = enumerate_granules(system, threshold, "source")
            assert as_keys(gs) == enumerate_bruteforce(system, threshold)

    def test_threshold_monotone(self):
        rng = np.random.default_rng(19)
        system = random_system(rng, 20, (3, 2, 3))
        loose = enumerate_granules(system, 0.1, "source")
        tight = enumerate_granules(system, 0.4, "source")
        loose_keys = set(as_keys(loose))
        assert set(as_keys(tight)) <= loose_keys

    def test_deterministic(self):
        rng = np.random.default_rng(21)
        system = random_system(rng, 18, (3, 3, 2))
        first = enumerate_granules(system, 0.2, "source")
        second = enumerate_granules(system, 0.2, "source")
        assert as_keys(first) == as_keys(second)
        assert first == second

    def test_canonical_order(self):
        rng = np.random.default_rng(27)
        system = random_system(rng, 16, (2, 2, 2, 3))
        gs = enumerate_granules(system, 0.1, "source")
        keys = [g.sort_key for g in gs]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_coverage_invariant(self):
        rng = np.random.default_rng(33)
        system = random_system(rng, 14, (2, 3))
        gs = enumerate_granules(system, 0.3, "source")
        assert all(g.coverage >= 0.3 for g in gs)
        assert all(extension(system, g.attrs, g.values) == g.extension for g in gs)

    def test_max_attrs_cap(self):
        rng = np.random.default_rng(35)
        system = random_system(rng, 12, (2, 2, 2))
        capped = enumerate_granules(system, 0.1, "source", max_attrs=2)
        assert max(len(g.attrs) for g in capped) == 2
        assert as_keys(capped) == enumerate_bruteforce(system, 0.1, max_attrs=2)

    def test_bad_threshold_rejected(self, user_table):
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError, match="threshold"):
                enumerate_granules(user_table, bad, "source")

    def test_bad_cap_rejected(self, user_table):
        with pytest.raises(ValueError, match="max_attrs"):
            enumerate_granules(user_table, 0.5, "source", max_attrs=0)


class TestMultivaluedGroup:
    def test_presence_only_by_default(self, movie_table):
        gs = enumerate_granules(movie_table, 0.1, "target", max_attrs=1)
        flags = {
            g.values[0]
            for g in gs
            if movie_table.schema.names[g.attrs[0]]
            in movie_table.schema.multivalued_group
        }
        one = movie_table.schema.domains[1].index("1")
        assert flags == {one}

    def test_allow_absence_lifts_restriction(self, movie_table):
        gs = enumerate_granules(movie_table, 0.1, "target", max_attrs=1,
                                allow_absence=True)
        oracle = enumerate_bruteforce(movie_table, 0.1, max_attrs=1,
                                      allow_absence=True)
        assert as_keys(gs) == oracle
        action = movie_table.schema.index("Action")
        values = {g.values[0] for g in gs if g.attrs == (action,)}
        assert values == {0, 1}

    def test_presence_only_matches_oracle(self, movie_table):
        gs = enumerate_granules(movie_table, 0.1, "target")
        assert as_keys(gs) == enumerate_bruteforce(movie_table, 0.1)


class TestMatch:
    def test_inducing_row_matches(self):
        rng = np.random.default_rng(43)
        system = random_system(rng, 9, (3, 2, 2))
        for x in range(system.n_objects):
            g = make_granule(system, (0, 2),
                             (system.rows[x][0], system.rows[x][2]), "source")
            assert match(g, system, x)

    def test_wrong_value_does_not_match(self, user_table):
        gender = user_table.schema.index("gender")
        f = user_table.schema.value_index(gender, "F")
        g = make_granule(user_table, (gender,), (f,), "source")
        assert not match(g, user_table, 0)  # first user is M

    def test_match_equals_extension_bit(self):
        rng = np.random.default_rng(47)
        system = random_system(rng, 11, (2, 3, 2))
        gs = enumerate_granules(system, 0.15, "source")
        for g in gs:
            for r in range(system.n_objects):
                assert match(g, system, r) == bool((g.extension >> r) & 1)

    def test_row_out_of_range(self, user_table):
        g = make_granule(user_table, (0,), (0,), "source")
        with pytest.raises(IndexError):
            match(g, user_table, 99)

    def test_schema_mismatch(self, user_table, movie_table):
        g = make_granule(movie_table, (2,), (1,), "target")
        tiny = InformationSystem(
            AttributeSchema(names=("x",), domains=(("only",),)), ((0,),)
        )
        with pytest.raises(SchemaMismatchError):
            match(g, tiny, 0)
