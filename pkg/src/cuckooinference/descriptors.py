"""Holds descriptor factory functions"""

from validateddescriptor import ValidatedDescriptor, value_check_factory

from src.cuckooinference.constants import CAPACITY_RULES

is_positive = value_check_factory(lambda x: x > 0, "positive")

is_non_negative = value_check_factory(lambda x: x >= 0, "non-negative")

is_u64 = value_check_factory(lambda x: 0 <= x < 2**64, "an unsigned 64-bit integer")

is_nonempty = value_check_factory(lambda x: len(x) > 0, "non-empty")

is_positive_grid = value_check_factory(lambda xs: all(x > 0 for x in xs), "made of positive values")


def positive_int() -> ValidatedDescriptor[int]:
    return ValidatedDescriptor[int](int, [is_positive])


def non_negative_int() -> ValidatedDescriptor[int]:
    return ValidatedDescriptor[int](int, [is_non_negative])


def positive_float() -> ValidatedDescriptor[float | int]:
    return ValidatedDescriptor[float | int](float | int, [is_positive])


def seed_desc() -> ValidatedDescriptor[int]:
    return ValidatedDescriptor[int](int, [is_u64])


def positive_grid() -> ValidatedDescriptor[tuple]:
    return ValidatedDescriptor[tuple](tuple, [is_nonempty, is_positive_grid])


is_capacity_rule = value_check_factory(lambda x: x in CAPACITY_RULES, f"one of {CAPACITY_RULES}")


def capacity_rule_desc() -> ValidatedDescriptor[str]:
    return ValidatedDescriptor[str](str, [is_capacity_rule])
