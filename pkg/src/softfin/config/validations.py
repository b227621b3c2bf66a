"""
Validation decorators for settings fields.
Validations run after transformers, on adapter values and defaults alike.

Example Usage:
    @is_in_range(0.0, 1.0, right_inclusive=False)
    @floating()
    @field(name="surrogate_dropout")
    def dropout(self) -> float:
        return 0.2
"""

import functools
from typing import Any, Callable, Collection, Optional, TypeVar

from softfin.config.core import field_spec, require_callable

T = TypeVar("T")
Comparable = TypeVar("Comparable")


def validate(callback: Callable[[Any], None]) -> Callable[..., T]:
    """
    Check what the getter returns; ``callback`` raises ValueError to reject.
    Also registered on the field so ``@config`` checks adapter values.
    """
    require_callable(callback)

    def wrapper(func: Callable[..., T]) -> Callable[..., T]:
        field_spec(func).validations.append(callback)

        @functools.wraps(func)
        def validate_and_call(*args, **kwargs):
            response = func(*args, **kwargs)
            try:
                callback(response)
            except ValueError as e:
                raise ValueError(
                    f'Validation failed for "{func.__name__}" method.'
                ) from e
            return response

        return validate_and_call

    return wrapper


def _interval(
    low: Optional[Comparable],
    high: Optional[Comparable],
    left_inclusive: bool,
    right_inclusive: bool,
) -> str:
    left = "[" if left_inclusive and low is not None else "("
    right = "]" if right_inclusive and high is not None else ")"
    low_text = "-inf" if low is None else str(low)
    high_text = "inf" if high is None else str(high)
    return f"{left}{low_text}, {high_text}{right}"


def is_in_range(
    min_value: Optional[Comparable],
    max_value: Optional[Comparable],
    left_inclusive: bool = True,
    right_inclusive: bool = True,
) -> Callable[..., T]:
    """
    Value must lie in the interval; a bound of None is open.
    :raises ValueError: Naming the value and the interval.
    """
    interval = _interval(min_value, max_value, left_inclusive, right_inclusive)

    def validation_callback(response: Any) -> None:
        above_low = min_value is None or (
            response >= min_value if left_inclusive else response > min_value
        )
        below_high = max_value is None or (
            response <= max_value if right_inclusive else response < max_value
        )
        if not (above_low and below_high):
            raise ValueError(f"{response!r} is outside {interval}.")

    return validate(validation_callback)


def is_in_choices(choices: Collection[Any]) -> Callable[..., T]:
    """
    Value must be one of ``choices``.
    """
    allowed = sorted(choices)

    def validation_callback(response: Any) -> None:
        if response not in choices:
            raise ValueError(f"{response!r} is not one of {allowed}.")

    return validate(validation_callback)


def min_length(length: int) -> Callable[..., T]:
    """
    Value must hold at least ``length`` items, e.g. a non-empty reference list.
    """

    def validation_callback(response: Any) -> None:
        if len(response) < length:
            raise ValueError(f"expected at least {length} items, got {len(response)}.")

    return validate(validation_callback)


__all__ = [
    "validate",
    "is_in_range",
    "is_in_choices",
    "min_length",
]
