import numpy as np
import pytest

from paulikit.core import PauliDistribution
from paulikit.rng import make_rng


def random_dense(n: int, seed) -> PauliDistribution:
    """Flat-Dirichlet random distribution over the full domain."""
    rng = make_rng(seed)
    return PauliDistribution.from_dense(n, rng.dirichlet(np.ones(4**n)))


def random_sparse(n: int, s: int, seed) -> PauliDistribution:
    rng = make_rng(seed)
    support = rng.choice(4**n, size=s, replace=False)
    return PauliDistribution.from_sparse(
        n, dict(zip(support.tolist(), rng.dirichlet(np.ones(s)).tolist()))
    )


@pytest.fixture
def tmp_channel_dir(tmp_path):
    return tmp_path
