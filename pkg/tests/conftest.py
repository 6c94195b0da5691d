import numpy as np
import pytest

from models import FamilyKind, FamilySolution, Sign
from utils.cache import spectrum_cache


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def fresh_cache():
    spectrum_cache.clear()
    yield
    spectrum_cache.clear()


def random_family(rng: np.random.Generator, kind: FamilyKind) -> FamilySolution:
    """Random admissible family solution of the given kind"""
    sign = Sign.upper if rng.random() < 0.5 else Sign.lower
    # |gamma| >= 0.2 keeps family II away from its pole on the real axis
    gamma = float(rng.uniform(0.2, 0.7)) * (1.0 if rng.random() < 0.5 else -1.0)
    return FamilySolution(
        kind=kind,
        b_R=float(rng.uniform(-2.0, 2.0)),
        b_I=float(rng.uniform(-2.0, 2.0)),
        c=float(rng.uniform(-1.0, 1.0)),
        gamma=gamma,
        sign=sign,
    )
