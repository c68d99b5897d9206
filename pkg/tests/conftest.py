import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from crossing_lab import BranchingLaw, CrossingSet

sys.path.insert(0, str(Path(__file__).parent))


@st.composite
def laws(draw, max_index=6):
    """Finite-support laws on ``{0, ..., max_index}`` with ``b_0 > 0``."""
    rate = st.floats(0.05, 5.0, allow_nan=False, allow_infinity=False)
    b = {0: draw(rate)}
    for j in range(2, max_index + 1):
        if draw(st.booleans()):
            b[j] = draw(rate)
    b[1] = -sum(b.values())
    return BranchingLaw(b)


@st.composite
def laws_with_sets(draw, max_index=6, max_size=2):
    law = draw(laws(max_index))
    candidates = [j for j in law.b if j != 1]
    chosen = draw(st.lists(st.sampled_from(candidates), min_size=1, max_size=max_size, unique=True))
    return law, CrossingSet(tuple(sorted(chosen)))


@pytest.fixture
def bd11():
    return BranchingLaw({0: 1.0, 1: -2.0, 2: 1.0})


@pytest.fixture
def bd12():
    return BranchingLaw({0: 1.0, 1: -3.0, 2: 2.0})


@pytest.fixture
def bd21():
    return BranchingLaw({0: 2.0, 1: -3.0, 2: 1.0})


@pytest.fixture
def death():
    return BranchingLaw({0: 1.0, 1: -1.0})
