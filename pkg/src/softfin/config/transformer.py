"""
Decorators that transform the values derived from settings sources or from
getter defaults. Settings files and environment variables deliver strings;
transformers turn them into the types the lab works with.

A transformer wraps the getter so it also works on plain functions, and
registers itself on the field so ``@config`` applies it to adapter values.

Example Usage:

```python
@config(use_defaults=True)
class RewardSettings:
    @floating()
    @field(name="reward_w_x")
    def w_x(self) -> float:
        return 1.0

    @float_pairs()
    @field(name="rl_grid_points")
    def grid_points(self) -> str:
        return "1,-1;2,-1"  # Returns [(1.0, -1.0), (2.0, -1.0)]
```
"""

import functools
from typing import Callable, List, Tuple, TypeVar

from softfin.config.core import field_spec, require_callable

T = TypeVar("T")
U = TypeVar("U")


def transform(callback: Callable[[T], U]) -> Callable[..., T]:
    """
    Adds a transform callback to be used when deriving a settings value.
    """
    require_callable(callback)

    def wrapper(func: Callable[..., T]) -> Callable[..., T]:
        field_spec(func).transforms.append(callback)

        @functools.wraps(func)
        def transform_and_call(*args, **kwargs):
            return callback(func(*args, **kwargs))

        return transform_and_call

    return wrapper


def cast_datatype(
    callback: Callable[[T], T], cast_null: bool = False
) -> Callable[[U], Callable[..., U]]:
    """
    Casts response using custom callback.

    Parameters:
        callback: Function that will cast response.
        cast_null: If False and if response is None, None will be returned.
    """

    def callback_wrapper(response: U) -> T:
        if response is None and cast_null is False:
            return None
        return callback(response)

    return transform(callback_wrapper)


def string(cast_null: bool = False) -> Callable[..., Callable[..., str]]:
    """
    Casts response to string.

    Example Outputs with cast_null=False:
        * "hello" -> "hello"
        * 0 -> "0"
        * None -> None
    """
    return cast_datatype(str, cast_null)


def integer() -> Callable[..., Callable[..., int]]:
    """
    Casts response to integer. Strings are parsed as decimal integers.

    Example Outputs:
        * "7" -> 7
        * 7.0 -> 7
        * "seven" -> Raises ValueError
        * None -> None
    """
    return cast_datatype(int)


def floating() -> Callable[..., Callable[..., float]]:
    """
    Casts response to float.

    Example Outputs:
        * "0.8" -> 0.8
        * "1e-3" -> 0.001
        * None -> None
    """
    return cast_datatype(float)


def _as_text(response) -> str:
    if isinstance(response, bytes):
        return response.decode("utf-8")
    return str(response)


def float_list() -> Callable[..., Callable[..., List[float]]]:
    """
    Reads a comma separated list of numbers, e.g. "0,1,2" -> [0.0, 1.0, 2.0].
    Lists and tuples pass through element-cast.
    """

    def callback(response) -> List[float]:
        if isinstance(response, (list, tuple)):
            return [float(x) for x in response]
        text = _as_text(response).strip()
        if not text:
            return []
        return [float(x) for x in text.split(",")]

    return cast_datatype(callback)


def _whole_number(value) -> int:
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"{value!r} is not a whole number.")
        return int(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    text = _as_text(value).strip()
    try:
        return int(text)
    except ValueError as e:
        raise ValueError(f"{text!r} is not a whole number.") from e


def int_list() -> Callable[..., Callable[..., List[int]]]:
    """
    Reads a comma separated list of whole numbers, e.g. "0,1,2" -> [0, 1, 2].

    Raises:
        ValueError: On an entry such as "1.7" that is not a whole number.
    """

    def callback(response) -> List[int]:
        if isinstance(response, (list, tuple)):
            return [_whole_number(x) for x in response]
        text = _as_text(response).strip()
        if not text:
            return []
        return [_whole_number(x) for x in text.split(",")]

    return cast_datatype(callback)


def float_pairs() -> Callable[..., Callable[..., List[Tuple[float, float]]]]:
    """
    Reads semicolon separated ``x,y`` pairs,
    e.g. "1,-1;2,0" -> [(1.0, -1.0), (2.0, 0.0)].

    Raises:
        ValueError: If an entry does not hold exactly two numbers.
    """

    def callback(response) -> List[Tuple[float, float]]:
        if isinstance(response, (list, tuple)):
            items = [tuple(float(v) for v in item) for item in response]
        else:
            text = _as_text(response).strip()
            items = []
            for chunk in filter(None, (c.strip() for c in text.split(";"))):
                items.append(tuple(float(v) for v in chunk.split(",")))
        for item in items:
            if len(item) != 2:
                raise ValueError(f"Expected an x,y pair, got {item!r}.")
        return [(item[0], item[1]) for item in items]

    return cast_datatype(callback)


__all__ = [
    "transform",
    "cast_datatype",
    "string",
    "integer",
    "floating",
    "float_list",
    "int_list",
    "float_pairs",
]
