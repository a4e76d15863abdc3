import os

# must precede the first numpy import; see the note in dwlab/__init__.py
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240911)


@pytest.fixture
def random_pair(rng):
    """A well-conditioned 6-dimensional complex Gram pair."""
    from dwlab import InnerProductPair

    n = 6
    gv = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    gh = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return InnerProductPair(
        gram_v=gv @ gv.conj().T + n * np.eye(n),
        gram_h=gh @ gh.conj().T + n * np.eye(n),
    )
