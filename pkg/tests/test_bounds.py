from fractions import Fraction
from itertools import product
from math import sqrt

import pytest

from src.cuckooinference.bounds import (
    BoundParams,
    bad_item_bound,
    bad_path_root_bound,
    bounds_table,
    capacity,
    d_squared_edge_bound,
    disjoint_probability,
    edge_probability,
    empirical_edge_frequency,
    failure_bound,
    geometric_partial_sum,
    labeled_path_count_bound,
    union_failure_bound,
    vector_intersection_probability,
)
from src.cuckooinference.core_model import Seed


def params(epsilon: float, m: int, n: int = 1) -> BoundParams:
    return BoundParams(n, m, epsilon)


@pytest.mark.parametrize(
    ("epsilon", "m", "expected"),
    [(1, 200, 0.01), (0.5, 1500, 0.002)],
)
def test_bad_path_root_bound(epsilon: float, m: int, expected: float) -> None:
    assert bad_path_root_bound(params(epsilon, m)) == pytest.approx(expected)


def test_root_bound_tends_to_one_over_m() -> None:
    m = 10**6
    values = [bad_path_root_bound(params(eps, m)) for eps in (1, 10, 100, 1e4)]

    assert all(v > 1 / m for v in values)
    assert values == sorted(values, reverse=True)
    assert values[-1] == pytest.approx(1 / m, rel=1e-3)


@pytest.mark.parametrize(
    ("epsilon", "m", "expected"),
    [(1, 200, 4.0e-4), (1, 2000, 4.0e-6), (0.5, 1500, 2.4e-5)],
)
def test_bad_item_bound(epsilon: float, m: int, expected: float) -> None:
    assert bad_item_bound(params(epsilon, m)) == pytest.approx(expected)


@pytest.mark.parametrize(
    ("epsilon", "n", "expected"),
    [(1, 100, 0.08), (0.5, 1000, 0.036), (0.1, 10, 1.0)],
)
def test_failure_bound(epsilon: float, n: int, expected: float) -> None:
    p = BoundParams.at_capacity(n, epsilon)

    assert failure_bound(p) == pytest.approx(expected)


def test_capacity_uses_decimal_epsilon() -> None:
    assert capacity(10, 0.1) == 11
    assert capacity(1000, 0.5) == 1500
    assert capacity(250, 0.5, 2, "dsq") == 1500
    assert capacity(7, 0.5) == 11


def test_bounds_clamp_to_one() -> None:
    p = params(0.01, 2)

    assert bad_path_root_bound(p) == 1.0
    assert bad_item_bound(p) == 1.0
    assert union_failure_bound(BoundParams(2, 3, 0.01)) == 1.0


@pytest.mark.parametrize(("n", "epsilon"), [(1000, 0.5), (100, 1), (400, 0.25), (5000, 2)])
def test_union_bound_identity(n: int, epsilon: float) -> None:
    p = BoundParams(n, round((1 + epsilon) * n), epsilon)

    assert failure_bound(p) == pytest.approx((1 + epsilon) * union_failure_bound(p))


def test_bounds_decrease_in_epsilon_and_size() -> None:
    for eps_low, eps_high in [(0.25, 0.5), (0.5, 1), (1, 3)]:
        low = BoundParams(1000, 10_000, eps_low)
        high = BoundParams(1000, 10_000, eps_high)
        assert bad_path_root_bound(high) < bad_path_root_bound(low)
        assert bad_item_bound(high) < bad_item_bound(low)
        assert failure_bound(high) < failure_bound(low)

    for small, large in [(1000, 2000), (2000, 8000)]:
        assert bad_path_root_bound(params(0.5, large)) < bad_path_root_bound(params(0.5, small))
        assert bad_item_bound(params(0.5, large)) < bad_item_bound(params(0.5, small))
        assert failure_bound(BoundParams.at_capacity(large, 0.5)) < failure_bound(BoundParams.at_capacity(small, 0.5))


@pytest.mark.parametrize(("epsilon", "m"), [(0.5, 1500), (1, 200), (2, 10)])
def test_root_bound_is_geometric_sum(epsilon: float, m: int) -> None:
    p = params(epsilon, m)

    assert abs(geometric_partial_sum(p, 2000) - bad_path_root_bound(p)) < 1e-12
    assert geometric_partial_sum(p, 5) < bad_path_root_bound(p)


def test_d_one_edge_probability_is_one_over_m() -> None:
    assert edge_probability(BoundParams(10, 100, 0.5)) == pytest.approx(0.01)
    assert vector_intersection_probability(1, 7) == pytest.approx(1 / 7)


def test_edge_probability_below_d_squared_over_m() -> None:
    for d, m in product([1, 2, 3, 4], [4, 10, 100, 1000]):
        assert vector_intersection_probability(d, m) <= d_squared_edge_bound(d, m) + 1e-15


def test_edge_probability_near_d_squared_over_m_for_large_m() -> None:
    assert vector_intersection_probability(2, 10**6) == pytest.approx(4e-6, rel=1e-4)


def test_edge_probability_small_case_by_hand() -> None:
    # d=2, m=2: the first vector has 1 distinct slot with prob 1/2, then the
    # second misses it with prob 1/4; with 2 distinct slots it cannot miss
    assert vector_intersection_probability(2, 2) == pytest.approx(7 / 8)


def test_disjoint_probability() -> None:
    assert disjoint_probability(5, 5, 5) == 0
    assert disjoint_probability(1, 2, 4) == Fraction(9, 16)


@pytest.mark.parametrize(("d", "m"), [(2, 100), (3, 100), (2, 1000)])
def test_edge_frequency_matches_exact_probability(d: int, m: int) -> None:
    samples = 10**6
    exact = vector_intersection_probability(d, m)
    frequency = empirical_edge_frequency(d, m, samples, Seed(d * m))
    sigma = sqrt(exact * (1 - exact) / samples)

    assert abs(frequency - exact) <= 3 * sigma
    assert frequency <= d * d / m


def test_edge_frequency_needs_samples() -> None:
    with pytest.raises(ValueError, match="samples"):
        empirical_edge_frequency(2, 10, 0, Seed(0))


@pytest.mark.parametrize(("n", "k", "expected"), [(50, 1, 1), (3, 3, 9), (17, 2, 17)])
def test_labeled_path_count_bound(n: int, k: int, expected: int) -> None:
    assert labeled_path_count_bound(n, k) == expected


def test_labeled_path_count_bounds_enumeration() -> None:
    # interior item sequences of length k-1 over n items with no item repeated and the root item excluded
    n, k = 3, 3
    interior = [seq for seq in product(range(1, n), repeat=k - 1) if len(set(seq)) == k - 1]

    assert len(interior) <= labeled_path_count_bound(n, k)


def test_labeled_path_count_needs_an_edge() -> None:
    with pytest.raises(ValueError, match="at least 1"):
        labeled_path_count_bound(3, 0)


def test_params_enforce_capacity() -> None:
    with pytest.raises(ValueError, match="violates"):
        BoundParams(1000, 1499, 0.5)

    with pytest.raises(ValueError, match="violates"):
        BoundParams(250, 1000, 0.5, 2, "dsq")

    BoundParams(250, 1500, 0.5, 2, "dsq")


def test_params_validate_fields() -> None:
    with pytest.raises(ValueError):
        BoundParams(10, 20, 0)

    with pytest.raises(ValueError):
        BoundParams(10, 20, 0.5, 1, "cubic")

    with pytest.raises(TypeError):
        BoundParams(10, 20.0, 0.5)  # type: ignore[arg-type]


def test_bounds_table_lists_every_bound() -> None:
    table = dict(bounds_table(BoundParams.at_capacity(1000, 0.5)))

    assert table["failure bound 2(1+eps)^2/eps^3 /n"] == pytest.approx(0.036)
    assert table["edge probability"] == pytest.approx(1 / 1500)
    assert len(table) == 6
