import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from granrec.core import AttributeSchema, BinaryRelation, InformationSystem, MMER

ML100K_ENV = "GRANREC_ML100K_DIR"
ML100K_DEFAULT = Path(__file__).resolve().parent.parent / "data" / "ml-100k"


def ml100k_path() -> Path | None:
    candidate = Path(os.environ.get(ML100K_ENV, ML100K_DEFAULT))
    needed = ("u.user", "u.item", "u.data")
    if all((candidate / name).is_file() for name in needed):
        return candidate
    return None


@pytest.fixture(scope="session")
def ml100k_dir():
    path = ml100k_path()
    if path is None:
        pytest.skip(
            f"MovieLens 100k not available: put u.user/u.item/u.data under "
            f"{ML100K_DEFAULT} or set ${ML100K_ENV}"
        )
    return path


@pytest.fixture(scope="session")
def ml100k(ml100k_dir):
    from granrec.datasets import MovieLensConfig, load_movielens

    return load_movielens(MovieLensConfig(ml100k_dir))


@pytest.fixture
def user_table():
    """Four users shaped like the demographic table: age interval, gender,
    occupation."""
    schema = AttributeSchema(
        names=("age", "gender", "occupation"),
        domains=(
            ("[18,24]", "[50,55]"),
            ("F", "M"),
            ("other", "student", "technician", "writer"),
        ),
    )
    rows = (
        (0, 1, 2),  # [18,24] M technician
        (1, 0, 0),  # [50,55] F other
        (0, 1, 3),  # [18,24] M writer
        (0, 1, 1),  # [18,24] M student
    )
    return InformationSystem(schema, rows)


@pytest.fixture
def movie_table():
    schema = AttributeSchema(
        names=("release-decade", "Action", "Adventure"),
        domains=(("before-1970s", "1970s-1980s", "1990s"),
                 ("0", "1"), ("0", "1")),
        multivalued_group=frozenset({"Action", "Adventure"}),
    )
    rows = ((2, 0, 0), (2, 0, 1), (2, 0, 0), (1, 1, 1), (2, 1, 0))
    return InformationSystem(schema, rows)


@pytest.fixture
def small_mmer(user_table, movie_table):
    relation = BinaryRelation.from_pairs(
        4, 5, [(0, 1), (0, 3), (1, 0), (1, 3), (1, 4), (2, 4), (3, 2), (3, 3)]
    )
    return MMER(user_table, movie_table, relation)
