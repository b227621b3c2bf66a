"""
Adapter for getting field values from flat key-value settings files.

The file has one ``key = value`` pair per line, no sections; ``#`` and ``;``
start comments. Keys are the field names declared with ``@field``.

Example Usage:
```python
@config([KeyValueFileAdapter(["/path/to/lab.conf"])], use_defaults=True)
class PlantSettings:
    @field(name="plant_c_n")
    def c_n(self) -> str:
        # Will look for "plant_c_n" in "/path/to/lab.conf"
        return "0.8"
```
"""

import configparser
import logging
import os
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from softfin.config.core import AdapterBase, AdapterError


T = TypeVar("T")
logger = logging.getLogger(__name__)

_SECTION = "softfin"


def read_key_value_file(path: str) -> Dict[str, str]:
    """
    Parse a flat key-value file into a dict.

    :raises FileNotFoundError: If the file does not exist.
    :raises ValueError: If a line is neither a comment nor ``key = value``.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Config file {path} not found.")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(f"[{_SECTION}]\n{text}", source=path)
    except configparser.Error as e:
        raise ValueError(f"Malformed config file {path}: {e}") from e
    return dict(parser.items(_SECTION))


class KeyValueFileAdapter(AdapterBase):
    """
    Adapter for getting field value from flat key-value files.
    Later files override earlier ones.

    Parameters:
        file_paths: List of settings file paths.
    """

    def __init__(self, file_paths: Optional[List[str]] = None):
        self.file_paths: List[str] = list(file_paths or [])
        if not self.file_paths:
            logger.warning("No settings files specified for KeyValueFileAdapter")
        self._values: Optional[Dict[str, str]] = None

    @property
    def values(self) -> Dict[str, str]:
        """
        All keys of all files, parsed once.
        """
        if self._values is None:
            values: Dict[str, str] = {}
            for path in self.file_paths:
                values.update(read_key_value_file(path))
            self._values = values
        return self._values

    def check_keys(self, known_keys: Iterable[str]) -> None:
        """
        Reject keys that no settings field declares.

        :raises ValueError: Naming the first unknown key.
        """
        known = set(known_keys)
        for key in self.values:
            if key not in known:
                raise ValueError(f"Unknown config key {key!r} in {self.file_paths}")

    # pylint: disable=unused-argument
    def get_field(
        self, field_name: str, method: Callable[..., T], *method_args, **method_kwargs
    ) -> Any:
        try:
            return self.values[field_name.lower()]
        except KeyError as e:
            raise AdapterError(
                f"Field {field_name} not found in {self.file_paths}"
            ) from e
