# SPDX-License-Identifier: MIT

import importlib
import math
import typing as t

import numpy as np

__all__ = ("JSONable", "load_json", "dump_json", "load_json_serializers", "to_jsonable")

JSONable = str | int | float | bool | None | t.Sequence["JSONable"] | t.Mapping[str, "JSONable"]


@t.runtime_checkable
class _JSONLoader(t.Protocol):
    def __call__(self, obj: str, /) -> JSONable:
        raise NotImplementedError


@t.runtime_checkable
class _JSONDumper(t.Protocol):
    def __call__(self, obj: JSONable, /) -> str:
        raise NotImplementedError


load_json: t.Callable[[str], JSONable]
_dump_raw: t.Callable[[JSONable], str]


def load_json_serializers(
    module: t.Optional[str] = None,
    *,
    loader: str | _JSONLoader,
    dumper: str | _JSONDumper,
):
    global load_json, _dump_raw

    if module is not None:
        if not isinstance(loader, str) or not isinstance(dumper, str):
            raise ValueError(
                f"Expected loader and dumper parameters to be str,"
                f" not {type(loader)!r} and {type(dumper)!r}."
            )

        try:
            loaded_module = importlib.import_module(module)
        except ImportError:
            raise ImportError(
                f"You do not seem to have {module} installed."
                " Please install it before attempting to use it for json serialization."
            )

        if not hasattr(loaded_module, loader) or not hasattr(loaded_module, dumper):
            raise ValueError(f"{module} has no attribute {loader} and/or {dumper}.")

        load_json = getattr(loaded_module, loader)
        _dump_raw = getattr(loaded_module, dumper)
    else:
        if isinstance(loader, str) or isinstance(dumper, str):
            raise ValueError(
                f"Expected loader and dumper parameters to be callables,"
                f" not {type(loader)!r} and {type(dumper)!r}."
            )

        load_json = loader
        _dump_raw = dumper


def to_jsonable(obj: t.Any) -> JSONable:
    """Convert numpy scalars/arrays and tuples into plain JSON values.

    Non-finite floats become ``None`` so both serializer backends agree.
    """
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, t.Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dump_json(obj: t.Any) -> str:
    return _dump_raw(to_jsonable(obj))


try:
    import orjson

    # orjson returns bytes, so the module loading path cannot be used
    load_json_serializers(
        loader=orjson.loads,
        dumper=lambda __obj: orjson.dumps(__obj, option=orjson.OPT_INDENT_2).decode(),
    )

except ImportError:
    import json as _json

    load_json_serializers(
        loader=_json.loads,
        dumper=lambda __obj: _json.dumps(__obj, indent=2, allow_nan=False),
    )
