import warnings

import numpy as np
import pytest

from pademiner.numerics import PrecisionContext
from pademiner.series import PrincipalPart, EntireTail, MeromorphicModel, SystemModel
from pademiner.testbed import examples


@pytest.fixture(scope='session')
def context():
    return PrecisionContext(512)


@pytest.fixture(scope='session')
def catalog(context):
    return {ex.id: ex for ex in examples(context)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def truth(context, text):
    """Ground truth strings ('1/2', 'inf') at the working precision."""
    return context.parse_real(text)


def random_location(rng, context, low=0.3, high=5.0):
    modulus = rng.uniform(low, high)
    angle = rng.uniform(-np.pi, np.pi)
    return context.mpc(complex(modulus*np.cos(angle), modulus*np.sin(angle)))


def random_rational_model(rng, context, poles):
    parts = []
    while len(parts) < poles:
        loc = random_location(rng, context)
        if any(abs(complex(loc) - complex(p.location)) < 0.2 for p in parts):
            continue
        residue = complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        parts.append(PrincipalPart(loc, (context.mpc(residue),)))
    return MeromorphicModel(parts, EntireTail(), context)


def random_rational_system(rng, context, max_d=3, max_m=2):
    """d <= max_d components, m_k <= max_m, simple poles in 0.3 <= |z| <= 5."""
    d = int(rng.integers(1, max_d+1))
    m = tuple(int(x) for x in rng.integers(1, max_m+1, size=d))
    components = [random_rational_model(rng, context, int(rng.integers(1, 4))) for _ in range(d)]
    return SystemModel(components, m)


@pytest.fixture
def quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        yield
