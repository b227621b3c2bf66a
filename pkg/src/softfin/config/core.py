"""
Core of the settings layer: the adapter contract and the per-getter field
record that the decorators fill in.

Every decorator in this package works on the same ``FieldSpec``, attached to
the getter under ``FIELD_ATTRIBUTE``. ``functools.wraps`` copies the
attribute to wrappers, so the record stays shared however many
transformers and validations are stacked on the getter.
"""

import inspect
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, TypeVar

T = TypeVar("T")

FIELD_ATTRIBUTE = "__softfin_field__"


def require_callable(callback: Callable[..., T]) -> Callable[..., T]:
    """
    :raises TypeError: If ``callback`` is missing or not callable.
    """
    if not callback:
        raise TypeError("Callback is required.")
    if not callable(callback):
        raise TypeError("Callback must be a callable.")
    return callback


def is_adapter(candidate: Any) -> bool:
    """
    Duck-typed adapter check, anything with ``get_field`` qualifies.
    """
    return hasattr(candidate, AdapterBase.get_field.__name__)


class AdapterError(Exception):
    """
    Raised when an adapter does not hold a field; the next adapter is tried.
    """


# pylint: disable=too-few-public-methods
class AdapterBase(ABC):
    """
    Base class for all settings sources.
    """

    @abstractmethod
    def get_field(
        self, field_name: str, method: Callable[..., T], *method_args, **method_kwargs
    ) -> Any:
        """
        Look ``field_name`` up in this source.

        :param method: The getter being resolved.
        :return: The raw value, usually a string.
        :raises AdapterError: If the source does not hold the field.
        """


@dataclass
class FieldSpec:
    """
    How one settings field is resolved.
    """

    name: Optional[str] = None
    optional: bool = False
    # None until @add_adapter or @config sets them.
    adapters: Optional[List[AdapterBase]] = None
    transforms: List[Callable[[Any], Any]] = field(default_factory=list)
    validations: List[Callable[[Any], None]] = field(default_factory=list)

    @property
    def is_field(self) -> bool:
        return self.name is not None

    def add_adapter(self, adapter: AdapterBase) -> None:
        """
        Field-level adapters are tried in reverse decoration order.
        """
        self.adapters = [adapter, *(self.adapters or [])]

    def resolve(self, value: Any) -> Any:
        """
        Run transformers then validations on a raw value.

        :raises ValueError: Naming the field.
        """
        try:
            for callback in self.transforms:
                value = callback(value)
            for callback in self.validations:
                callback(value)
        except ValueError as e:
            raise ValueError(f"Invalid value for field {self.name}: {e}") from e
        return value


def has_field_spec(function: Any) -> bool:
    """
    True for getters marked with @field.
    """
    spec = getattr(function, FIELD_ATTRIBUTE, None)
    return isinstance(spec, FieldSpec) and spec.is_field


def field_spec(function: Callable[..., Any], create: bool = True) -> FieldSpec:
    """
    The ``FieldSpec`` of ``function``, attaching an empty one if asked.

    :raises ValueError: If ``function`` has none and ``create`` is False.
    """
    spec = getattr(function, FIELD_ATTRIBUTE, None)
    if spec is None:
        if not create:
            raise ValueError("Please decorate the method with @field.")
        spec = FieldSpec()
        setattr(function, FIELD_ATTRIBUTE, spec)
    return spec


def default_getter(function: Callable[..., T]) -> Callable[..., T]:
    """
    Innermost getter, the one whose return value is the field default.
    """
    return inspect.unwrap(function)
