"""Hypothesis strategies and seeded instance streams shared by the tests."""
from collections.abc import Iterator

import hypothesis.strategies as st
import numpy as np

from src.cuckooinference.core_model import Instance, Seed, sample_instance


@st.composite
def instances(draw: st.DrawFn, max_n: int = 8, max_m: int = 8, max_d: int = 2) -> Instance:
    n = draw(st.integers(0, max_n))
    m = draw(st.integers(1, max_m))
    d = draw(st.integers(1, max_d))
    vector = st.lists(st.integers(0, m - 1), min_size=d, max_size=d)
    rows = draw(st.lists(st.tuples(vector, vector), min_size=n, max_size=n))

    if not rows:
        return Instance(m, d, np.empty((0, 2, d), dtype=np.int64))

    return Instance(m, d, np.array(rows, dtype=np.int64))


def small_instances(count: int, seed: int = 2024, max_n: int = 10, max_m: int = 8) -> Iterator[Instance]:
    """Deterministic stream cycling n over [0, max_n], m over [1, max_m] and d over {1, 2}."""
    master = Seed(seed)
    for trial in range(count):
        n = trial % (max_n + 1)
        m = 1 + (trial // (max_n + 1)) % max_m
        d = 1 + (trial // ((max_n + 1) * max_m)) % 2
        yield sample_instance(n, m, d, master, trial)
