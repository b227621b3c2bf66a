"""
Adapter for explicit overrides held in memory, such as command-line flags.
Keys are field names; a value of None counts as absent.
"""

from typing import Any, Callable, Mapping, TypeVar

from softfin.config.core import AdapterBase, AdapterError


T = TypeVar("T")


class MappingAdapter(AdapterBase):
    """
    Looks fields up in a mapping.

    :param values: Field name to raw value.
    """

    def __init__(self, values: Mapping[str, Any]):
        self._values = dict(values)

    # pylint: disable=unused-argument
    def get_field(
        self, field_name: str, method: Callable[..., T], *args, **kwargs
    ) -> Any:
        value = self._values.get(field_name)
        if value is None:
            raise AdapterError(f"Override {field_name} not given.")
        return value
