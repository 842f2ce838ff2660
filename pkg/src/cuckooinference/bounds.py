"""Closed forms of the failure bounds for cuckoo hashing with m >= (1+eps)n slots per table
(m >= (1+eps)d^2 n in the d-dimensional variant). Every probability is clamped to [0, 1]."""
from fractions import Fraction
from math import ceil, comb, factorial

import numpy as np

from src.cuckooinference import descriptors
from src.cuckooinference.constants import CAPACITY_RULES
from src.cuckooinference.core_model import Seed
from src.cuckooinference.numba_funcs import count_intersections


def _exact(value: float | int) -> Fraction:
    # decimal reading of the user's value, so eps = 0.1 gives exactly 11 slots for n = 10
    return Fraction(repr(value)) if isinstance(value, float) else Fraction(value)


def required_slots(n: int, epsilon: float, d: int = 1, rule: str = "classic") -> Fraction:
    if rule not in CAPACITY_RULES:
        msg = f"capacity rule must be one of {CAPACITY_RULES}, got {rule!r}"
        raise ValueError(msg)

    factor = d * d if rule == "dsq" else 1

    return (1 + _exact(epsilon)) * factor * n


def capacity(n: int, epsilon: float, d: int = 1, rule: str = "classic") -> int:
    """Smallest m meeting the capacity rule: ceil((1+eps)n), or ceil((1+eps)d^2 n) for "dsq"."""
    return ceil(required_slots(n, epsilon, d, rule))


class BoundParams:
    """Parameters of the bounds.

    n: positive int. Number of items.

    m: positive int. Slots per table, at least (1+epsilon)n, or (1+epsilon)d^2 n under the "dsq" rule.

    epsilon: positive float. Load slack.

    d: positive int. Slots per item per table. The default is 1.

    rule: "classic" or "dsq". The default is "classic".
    """

    n = descriptors.positive_int()
    m = descriptors.positive_int()
    epsilon = descriptors.positive_float()
    d = descriptors.positive_int()
    rule = descriptors.capacity_rule_desc()

    def __init__(self, n: int, m: int, epsilon: float, d: int = 1, rule: str = "classic") -> None:
        self.n = n
        self.m = m
        self.epsilon = epsilon
        self.d = d
        self.rule = rule

        self.validate()

    @classmethod
    def at_capacity(cls, n: int, epsilon: float, d: int = 1, rule: str = "classic") -> "BoundParams":
        return cls(n, capacity(n, epsilon, d, rule), epsilon, d, rule)

    def validate(self) -> None:
        if self.m < required_slots(self.n, self.epsilon, self.d, self.rule):
            factor = "(1+eps)d^2 n" if self.rule == "dsq" else "(1+eps)n"
            msg = f"m={self.m} violates m >= {factor} for n={self.n}, eps={self.epsilon}, d={self.d}"
            raise ValueError(msg)

    def __repr__(self) -> str:
        return f"BoundParams(n={self.n}, m={self.m}, epsilon={self.epsilon}, d={self.d}, rule={self.rule!r})"


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def bad_path_root_bound(params: BoundParams) -> float:
    """(1+eps)/(eps m): bound on a fixed node rooting a basic bad path."""
    params.validate()
    eps = params.epsilon

    return _clamp((1 + eps) / (eps * params.m))


def geometric_partial_sum(params: BoundParams, terms: int) -> float:
    """(1/m) * sum over k = 1..terms of (1/(1+eps))^(k-1), which tends to bad_path_root_bound."""
    ratio = 1 / (1 + params.epsilon)
    total = sum(ratio ** (k - 1) for k in range(1, terms + 1))

    return total / params.m


def _bad_item_bound(params: BoundParams) -> float:
    eps = params.epsilon
    return ((1 + eps) / eps) ** 3 * 2 / params.m**2


def bad_item_bound(params: BoundParams) -> float:
    """((1+eps)/eps)^3 * 2/m^2: bound on a fixed item being bad."""
    params.validate()
    return _clamp(_bad_item_bound(params))


def failure_bound(params: BoundParams) -> float:
    """2(1+eps)^2/eps^3 * 1/n: bound on some item being bad, i.e. on no legal placement existing."""
    params.validate()
    eps = params.epsilon

    return _clamp(2 * (1 + eps) ** 2 / eps**3 / params.n)


def union_failure_bound(params: BoundParams) -> float:
    """n times the per-item bound at the actual m. At m = (1+eps)n this is failure_bound / (1+eps)."""
    params.validate()
    return _clamp(params.n * _bad_item_bound(params))


def _stirling2(d: int) -> list[int]:
    """Row d of the Stirling numbers of the second kind, S(d, 0..d)."""
    row = [1]
    for i in range(1, d + 1):
        row = [k * (row[k] if k < len(row) else 0) + (row[k - 1] if k >= 1 else 0) for k in range(i + 1)]

    return row


def disjoint_probability(k: int, d: int, m: int) -> Fraction:
    """Probability that a uniform d-vector over [m] avoids a fixed set of k slots."""
    return Fraction(m - k, m) ** d


def vector_intersection_probability(d: int, m: int) -> float:
    """Exact probability that two independent uniform d-vectors over [m] share a slot.

    Conditions on the number k of distinct slots in the first vector, which has probability
    C(m, k) S(d, k) k! / m^d, and the second vector then misses all k with ((m-k)/m)^d.
    """
    if d < 1 or m < 1:
        msg = f"d and m must be positive, got d={d}, m={m}"
        raise ValueError(msg)

    stirling = _stirling2(d)
    disjoint = Fraction(0)
    for k in range(1, min(d, m) + 1):
        distinct_k = Fraction(comb(m, k) * stirling[k] * factorial(k), m**d)
        disjoint += distinct_k * disjoint_probability(k, d, m)

    return float(1 - disjoint)


def edge_probability(params: BoundParams) -> float:
    """Probability that a given inference edge is present: 1/m for d = 1, the exact vector
    intersection probability for d >= 2, always at most d^2/m."""
    return vector_intersection_probability(params.d, params.m)


def d_squared_edge_bound(d: int, m: int) -> float:
    return _clamp(d * d / m)


def labeled_path_count_bound(n: int, k: int) -> int:
    """n^(k-1) labelings of the k-1 inner nodes of a basic bad path with k edges and fixed ends."""
    if k < 1:
        msg = f"path length k must be at least 1, got {k}"
        raise ValueError(msg)

    return n ** (k - 1)


def empirical_edge_frequency(d: int, m: int, samples: int, seed: Seed) -> float:
    """Fraction of `samples` random pairs of d-vectors over [m] that intersect."""
    if samples < 1:
        msg = f"samples must be positive, got {samples}"
        raise ValueError(msg)

    hits = count_intersections(d, m, samples, np.uint64(seed.master))

    return hits / samples


def bounds_table(params: BoundParams) -> list[tuple[str, float]]:
    """Every bound for params, labeled, in presentation order."""
    return [
        ("edge probability", edge_probability(params)),
        ("d^2/m edge bound", d_squared_edge_bound(params.d, params.m)),
        ("bad path root bound (1+eps)/(eps m)", bad_path_root_bound(params)),
        ("bad item bound ((1+eps)/eps)^3 2/m^2", bad_item_bound(params)),
        ("union over items n * bad item bound", union_failure_bound(params)),
        ("failure bound 2(1+eps)^2/eps^3 /n", failure_bound(params)),
    ]
