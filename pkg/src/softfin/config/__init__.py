"""
Decorator driven settings for softfin.

A settings class is a plain class whose getters are marked with ``@field``;
the getter body returns the default. ``@config`` wires the getters to a list
of adapters (override mapping, key-value file, environment) that are tried
in order before the default is used.

Example Usage:

```python
from softfin.config import config, field, EnvAdapter
from softfin.config.transformer import floating


@config([EnvAdapter(env_prefix="SOFTFIN_")], use_defaults=True)
class PlantSettings:
    @floating()
    @field(name="plant_c_n")
    def c_n(self) -> float:
        return 0.8  # Unless SOFTFIN_PLANT_C_N is set
```
"""

from typing import Any, Callable, Dict, List, Optional, Type, TypeVar

from softfin.config.core import (
    FIELD_ATTRIBUTE,
    AdapterBase,
    AdapterError,
    FieldSpec,
    default_getter,
    field_spec,
    has_field_spec,
    is_adapter,
)
from softfin.config.env_adapter import EnvAdapter
from softfin.config.file_adapter import KeyValueFileAdapter
from softfin.config.mapping_adapter import MappingAdapter

T = TypeVar("T")

_CACHE_ATTRIBUTE = "_settings_cache"
_INSTANCE_ADAPTERS_ATTRIBUTE = "_settings_adapters"


def _lookup(spec: FieldSpec, getter: Callable[..., T], instance, *args, **kwargs):
    instance_adapters = getattr(instance, _INSTANCE_ADAPTERS_ATTRIBUTE, [])
    for adapter_ in [*instance_adapters, *(spec.adapters or [])]:
        try:
            return adapter_.get_field(spec.name, getter, instance, *args, **kwargs)
        except AdapterError:
            continue
    raise AdapterError(f"{spec.name} not found in any adapter")


def _resolving_getter(
    getter: Callable[..., T], spec: FieldSpec, use_defaults: bool
) -> Callable[..., T]:
    default = default_getter(getter)
    fall_back = use_defaults or spec.optional

    def resolve_field(instance, *args, **kwargs) -> T:
        cache: Dict[str, Any] = instance.__dict__.setdefault(_CACHE_ATTRIBUTE, {})
        if spec.name in cache:
            return cache[spec.name]
        try:
            raw = _lookup(spec, getter, instance, *args, **kwargs)
        except AdapterError as e:
            if not fall_back:
                raise ValueError(f"Field {spec.name} not found in any config.") from e
            raw = default(instance, *args, **kwargs)
        value = cache[spec.name] = spec.resolve(raw)
        return value

    setattr(resolve_field, FIELD_ATTRIBUTE, spec)
    resolve_field.__doc__ = default.__doc__
    resolve_field.__name__ = getter.__name__
    return resolve_field


def reset_cache(obj: Any) -> None:
    """
    Reset cached field values of a settings instance.
    """
    obj.__dict__.pop(_CACHE_ATTRIBUTE, None)


def use_adapters(obj: Any, *adapters: AdapterBase) -> Any:
    """
    Give a settings instance its own adapters, tried before the class ones.
    """
    if not all(is_adapter(a) for a in adapters):
        raise TypeError("Adapter must extend AdapterBase or have get_field method.")
    setattr(obj, _INSTANCE_ADAPTERS_ATTRIBUTE, list(adapters))
    reset_cache(obj)
    return obj


def field_names(class_: Type[Any]) -> Dict[str, str]:
    """
    Map of field name to attribute name, in declaration order.
    """
    return {
        field_spec(getter).name: attribute
        for attribute, getter in class_.__dict__.items()
        if callable(getter) and has_field_spec(getter)
    }


def field(name: str) -> Callable[..., T]:
    """
    Mark a method as the getter of setting ``name``.

    :raises TypeError: If ``name`` is None.
    """
    if name is None:
        raise TypeError("Name is required.")
    name = str(name)

    def wrapper(func: Callable[..., T]) -> Callable[..., T]:
        field_spec(func).name = name
        return func

    return wrapper


def optional(is_optional: bool = True) -> Callable[..., T]:
    """
    A missing optional field resolves to the getter's return value even when
    the class does not use defaults.
    """
    if not isinstance(is_optional, bool):
        raise TypeError("Optional should be a boolean.")

    def wrapper(func: Callable[..., T]) -> Callable[..., T]:
        field_spec(func).optional = is_optional
        return func

    return wrapper


def add_adapter(adapter_: AdapterBase) -> Callable[..., T]:
    """
    Adapter consulted for this field before the class adapters.
    """
    if adapter_ is None:
        raise TypeError("Adapter is required.")
    if not is_adapter(adapter_):
        raise TypeError("Adapter must extend AdapterBase or have get_field method.")

    def wrapper(func: Callable[..., T]) -> Callable[..., T]:
        field_spec(func).add_adapter(adapter_)
        return func

    return wrapper


DEFAULT_ADAPTERS: List[AdapterBase] = [EnvAdapter(env_prefix="SOFTFIN_")]


def config(adapters: Optional[List[AdapterBase]] = None, use_defaults: bool = False):
    """
    Decorator for the settings class.

    :param adapters: Class level adapters, defaults to ``DEFAULT_ADAPTERS``.
    :param use_defaults: Fall back to the getter return value for every field.
    """
    class_adapters = DEFAULT_ADAPTERS if adapters is None else adapters

    def wrapper(class_: Type[Any]):
        for attribute, getter in list(class_.__dict__.items()):
            if not callable(getter) or not has_field_spec(getter):
                continue
            spec = field_spec(getter)
            spec.adapters = [*(spec.adapters or []), *class_adapters]
            setattr(class_, attribute, _resolving_getter(getter, spec, use_defaults))
        return class_

    return wrapper


__all__ = [
    "field",
    "optional",
    "add_adapter",
    "reset_cache",
    "use_adapters",
    "field_names",
    "config",
    # Adapters
    "AdapterBase",
    "AdapterError",
    "EnvAdapter",
    "KeyValueFileAdapter",
    "MappingAdapter",
]
