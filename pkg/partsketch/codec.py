from typing import Any, Dict

try:
    from ujson import dumps as _dumps, loads

    _OPTIONS: Dict[str, Any] = {"escape_forward_slashes": False}
except ImportError:
    from json import dumps as _dumps, loads

    _OPTIONS = {}

__all__ = ["dumps", "loads"]


def dumps(obj: Any) -> str:
    """Serialize obj to the JSON layout used by every artifact we write:
    sorted keys, two space indent and a trailing newline.

    Only plain python values are accepted (no numpy scalars), callers convert first.

    :param obj: The object to be serialized
    :return: The JSON text
    """
    return _dumps(obj, sort_keys=True, indent=2, **_OPTIONS) + "\n"
