import numpy as np
import pytest

from uncq.types import PosteriorEnsemble


def random_ensemble(rng, s=None, k=None, min_prob=0.0, random_weights=False):
    """Random valid ensemble; min_prob > 0 keeps all entries strictly positive."""
    s = s or int(rng.integers(1, 9))
    k = k or int(rng.integers(2, 7))
    members = rng.dirichlet(np.ones(k), size=s)
    if min_prob > 0.0:
        members = np.maximum(members, min_prob)
        members = members / members.sum(axis=1, keepdims=True)
    weights = None
    if random_weights:
        weights = rng.dirichlet(np.ones(s))
    return PosteriorEnsemble(members, weights)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
