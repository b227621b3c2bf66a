"""
Derives settings values from environment variables named after the field,
upper-cased, behind the adapter prefix.

Example Usage:
```python
@config([EnvAdapter(env_prefix="SOFTFIN_")], use_defaults=True)
class RunSettings:
    @field(name="seed")
    def seed(self) -> str:
        return "0" # Returns value of "SOFTFIN_SEED" when it is set
```
"""

import os
from typing import Callable, TypeVar

from softfin.config.core import AdapterBase, AdapterError

T = TypeVar("T")


class EnvAdapter(AdapterBase):
    """
    :param env_prefix: Prepended as given, e.g. ``SOFTFIN_``.
    """

    def __init__(self, env_prefix: str = ""):
        self._env_prefix = env_prefix

    def variable_name(self, field_name: str) -> str:
        return self._env_prefix + field_name.upper()

    # pylint: disable=unused-argument
    def get_field(
        self, field_name: str, method: Callable[..., T], *args, **kwargs
    ) -> str:
        env_name = self.variable_name(field_name)
        try:
            return os.environ[env_name]
        except KeyError as e:
            raise AdapterError(f"Environment variable {env_name} not set.") from e
