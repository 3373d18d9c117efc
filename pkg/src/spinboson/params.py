# Copyright 2024 Jacob Baumbach
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Params: the nested configuration of a run, with typed accessors."""
import copy
import json
import logging
import os
import zlib
from collections.abc import MutableMapping
from os import PathLike
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

import tomli
import yaml

from spinboson.exception.configuration_error import ConfigurationError

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "SPINBOSON_OUTPUT"
"""environment variable naming the default output root"""

PRESETS: Dict[str, Dict[str, Any]] = {
    "canonical": {
        "model": {
            "s": 0.3,
            "lambda_grid": 1.05,
            "num_modes": 430,
            "epsilon": 0.0,
            "omega_c": 1.0,
        },
    },
    "desk": {
        "model": {
            "s": 0.3,
            "lambda_grid": 1.05,
            "num_modes": 60,
            "epsilon": 0.0,
            "omega_c": 1.0,
        },
        "solver": {"restarts": 32, "max_sweeps": 20000},
    },
}
"""named settings; ``canonical`` is sub-Ohmic s=0.3 with 430 modes on a 1.05 mesh"""


class ParamsEncoder(json.JSONEncoder):
    """Encoder that unwraps nested ``Params``"""

    def default(self, obj: Any) -> Any:
        """Serialize nested ``Params`` as plain dicts

        Args:
            obj: something trying to be serialized to disk

        Returns:
            Encoded version of the input
        """
        if isinstance(obj, Params):
            return obj.as_sorted_dict()
        return json.JSONEncoder.default(self, obj)


def infer_and_cast(value: Any) -> Any:
    """Cast strings that look like bools, ints or floats.

    Command line overrides arrive as text (``--set model.num_modes=60``),
    this recovers their type.

    Args:
        value (Any): value, or nested list/dict of values, to cast

    Returns:
        Any: ``value`` with castable strings replaced

    Raises:
        ConfigurationError: ``value`` is not JSON-like
    """
    if value is None or isinstance(value, (int, float, bool)):
        return value
    if isinstance(value, list):
        return [infer_and_cast(item) for item in value]
    if isinstance(value, dict):
        return {key: infer_and_cast(item) for key, item in value.items()}
    if isinstance(value, str):
        lowered = value.lower()
        if lowered in ("true", "false"):
            return lowered == "true"
        if lowered == "none":
            return None
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
        return value
    raise ConfigurationError(f"cannot infer type of {value!r}")


def unflatten(flat_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Turn dotted keys into nesting: ``{"a.b": 0}`` becomes ``{"a": {"b": 0}}``

    Args:
        flat_dict (Dict[str, Any]): mapping with compound keys

    Returns:
        Dict[str, Any]: nested mapping

    Raises:
        ConfigurationError: two keys claim the same location
    """
    unflat: Dict[str, Any] = {}

    for compound_key, value in flat_dict.items():
        curr_dict = unflat
        parts = compound_key.split(".")
        for key in parts[:-1]:
            curr_value = curr_dict.setdefault(key, {})
            if not isinstance(curr_value, dict):
                raise ConfigurationError(
                    "conflicting flattened keys", field=compound_key
                )
            curr_dict = curr_value
        if parts[-1] in curr_dict:
            raise ConfigurationError("conflicting flattened keys", field=compound_key)
        curr_dict[parts[-1]] = value

    return unflat


def parse_overrides(pairs: Sequence[str]) -> Dict[str, Any]:
    """Parse ``key=value`` strings into a flat, typed dict

    Args:
        pairs (Sequence[str]): strings such as ``model.alpha=0.02``

    Returns:
        Dict[str, Any]: dotted keys mapped to cast values

    Raises:
        ConfigurationError: a pair has no ``=``
    """
    flat: Dict[str, Any] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"override {pair!r} is not of the form key=value")
        flat[key.strip()] = infer_and_cast(value.strip())
    return flat


def output_root(explicit: Optional[str] = None) -> str:
    """Resolve the directory under which runs are written

    Args:
        explicit (Optional[str]): value of ``--output`` if given

    Returns:
        str: ``explicit``, else ``$SPINBOSON_OUTPUT``, else ``runs``
    """
    return explicit or os.environ.get(OUTPUT_ENV_VAR) or "runs"


class Params(MutableMapping):  # type: ignore[type-arg]
    """A nested configuration dictionary that remembers where it lives.

    Values are consumed with ``pop`` and its typed variants so that, once a
    section has been read, :meth:`assert_empty` catches misspelled or unknown
    keys. Every error names the field by its dotted path.

    Args:
        params (Dict[str, Any]): the raw configuration
        history (str): dotted prefix of this section, e.g. ``"model."``
    """

    DEFAULT = object()

    def __init__(self, params: Dict[str, Any], history: str = "") -> None:
        self.params = _replace_none(params)
        self.history = history

    def _field(self, key: str) -> str:
        return f"{self.history}{key}"

    def pop(self, key: str, default: Any = DEFAULT, keep_as_dict: bool = False) -> Any:
        """Remove and return ``key``, wrapping nested dicts in ``Params``

        Args:
            key (str): name of the field
            default (Any): returned when ``key`` is absent; when omitted the
                field is required
            keep_as_dict (bool): if ``True`` nested dicts are returned as is

        Returns:
            Any: the stored value

        Raises:
            ConfigurationError: a required field is missing
        """
        if default is self.DEFAULT:
            if key not in self.params:
                raise ConfigurationError("field is required", field=self._field(key))
            value = self.params.pop(key)
        else:
            value = self.params.pop(key, default)

        if keep_as_dict:
            return value
        return self._check_is_dict(key, value)

    def _cast(self, key: str, value: Any, kind: type) -> Any:
        if value is None:
            return None
        if kind is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
        else:
            try:
                cast = kind(value)
            except (TypeError, ValueError):
                pass
            else:
                if kind is int and isinstance(value, float) and cast != value:
                    raise ConfigurationError(
                        f"expected an integer, got {value!r}", field=self._field(key)
                    )
                return cast
        raise ConfigurationError(
            f"expected {kind.__name__}, got {value!r}", field=self._field(key)
        )

    def pop_int(self, key: str, default: Any = DEFAULT) -> Optional[int]:
        """Pop ``key`` and coerce it to an int"""
        return self._cast(key, self.pop(key, default), int)  # type: ignore[no-any-return]

    def pop_float(self, key: str, default: Any = DEFAULT) -> Optional[float]:
        """Pop ``key`` and coerce it to a float"""
        return self._cast(key, self.pop(key, default), float)  # type: ignore[no-any-return]

    def pop_bool(self, key: str, default: Any = DEFAULT) -> Optional[bool]:
        """Pop ``key`` and coerce it to a bool"""
        return self._cast(key, self.pop(key, default), bool)  # type: ignore[no-any-return]

    def pop_float_list(self, key: str, default: Any = DEFAULT) -> Optional[List[float]]:
        """Pop ``key`` as a list of floats; a scalar becomes a one element list"""
        value = self.pop(key, default)
        if value is None:
            return None
        if not isinstance(value, list):
            value = [value]
        return [self._cast(key, v, float) for v in value]

    def pop_choice(
        self, key: str, choices: Sequence[Any], default_to_first_choice: bool = False
    ) -> Any:
        """Pop ``key`` and check that it is one of ``choices``

        Args:
            key (str): name of the field
            choices (Sequence[Any]): acceptable values
            default_to_first_choice (bool): if ``True`` a missing field takes
                ``choices[0]``, otherwise it is required

        Returns:
            Any: one of ``choices``

        Raises:
            ConfigurationError: the value is not an acceptable choice
        """
        default = choices[0] if default_to_first_choice else self.DEFAULT
        value = self.pop(key, default)
        if value not in choices:
            raise ConfigurationError(
                f"{value!r} is not one of {list(choices)}", field=self._field(key)
            )
        return value

    def get(self, key: str, default: Any = DEFAULT) -> Any:
        """Return ``key`` without removing it, wrapping nested dicts"""
        default = None if default is self.DEFAULT else default
        return self._check_is_dict(key, self.params.get(key, default))

    def as_dict(self) -> Dict[str, Any]:
        """The underlying dict"""
        return self.params  # type: ignore[no-any-return]

    def as_flat_dict(self) -> Dict[str, Any]:
        """Collapse nesting into dotted keys"""
        flat_params: Dict[str, Any] = {}

        def recurse(parameters: Any, path: List[str]) -> None:
            for key, value in parameters.items():
                newpath = path + [key]
                if isinstance(value, (dict, Params)):
                    recurse(value, newpath)
                else:
                    flat_params[".".join(newpath)] = value

        recurse(self.params, [])
        return flat_params

    def as_sorted_dict(self) -> Dict[str, Any]:
        """Recursively key-sorted copy of the configuration"""

        def order_dict(dictionary: Any) -> Dict[str, Any]:
            return {
                key: order_dict(val) if isinstance(val, (dict, Params)) else val
                for key, val in sorted(dictionary.items(), key=lambda item: item[0])
            }

        return order_dict(self.params)

    def duplicate(self) -> "Params":
        """Deep copy, so popping from the copy leaves this one intact"""
        return copy.deepcopy(self)

    def assert_empty(self, section: str) -> None:
        """Raise if any field was left unread

        Args:
            section (str): name of the consumer, used in the message

        Raises:
            ConfigurationError: unknown fields remain
        """
        if self.params:
            unknown = ", ".join(self._field(k) for k in sorted(self.params))
            raise ConfigurationError(f"unknown fields for {section}: {unknown}")

    def __getitem__(self, key: str) -> Any:
        if key in self.params:
            return self._check_is_dict(key, self.params[key])
        raise KeyError(key)

    def __setitem__(self, key: str, value: Any) -> None:
        self.params[key] = value

    def __delitem__(self, key: str) -> None:
        del self.params[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self.params)

    def __len__(self) -> int:
        return len(self.params)

    def _check_is_dict(self, new_history: str, value: Any) -> Any:
        if isinstance(value, dict):
            return Params(value, history=self.history + new_history + ".")
        if isinstance(value, list):
            return [
                self._check_is_dict(f"{new_history}.{i}", v)
                for i, v in enumerate(value)
            ]
        return value

    @classmethod
    def from_file(cls, params_file: Union[str, "PathLike[str]"]) -> "Params":
        """Load a configuration from a json, yaml or toml file

        Args:
            params_file (Union[str, PathLike]): path to the configuration

        Returns:
            Params: content of the file

        Raises:
            ConfigurationError: unsupported extension or unreadable content
        """
        params_file = str(params_file)
        logger.info(f"reading configuration from {params_file}")
        try:
            if params_file.endswith(".json"):
                with open(params_file) as file_handle:
                    file_dict = json.load(file_handle)
            elif params_file.endswith((".yaml", ".yml")):
                with open(params_file) as file_handle:
                    file_dict = yaml.safe_load(file_handle)
            elif params_file.endswith(".toml"):
                with open(params_file, "rb") as file_handle:
                    file_dict = tomli.load(file_handle)
            else:
                raise ConfigurationError(
                    f"{params_file}: only json, yaml and toml are supported"
                )
        except (OSError, ValueError, yaml.YAMLError) as err:
            raise ConfigurationError(f"{params_file}: {err}") from err
        if not isinstance(file_dict, dict):
            raise ConfigurationError(f"{params_file}: top level must be a mapping")
        return cls(file_dict)

    @classmethod
    def from_preset(cls, name: str) -> "Params":
        """A copy of the named preset

        Raises:
            ConfigurationError: unknown preset
        """
        if name not in PRESETS:
            raise ConfigurationError(
                f"unknown preset {name!r}, choose from {sorted(PRESETS)}",
                field="preset",
            )
        return cls(copy.deepcopy(PRESETS[name]))

    def to_file(self, params_file: Union[str, "PathLike[str]"]) -> None:
        """Write the configuration as key-sorted json"""
        with open(params_file, "w") as handle:
            json.dump(self.as_sorted_dict(), handle, indent=4, cls=ParamsEncoder)

    def get_hash(self) -> str:
        """Stable fingerprint of the current content.

        ``zlib.adler32`` of the key-sorted json dump; unlike ``hash`` it does
        not change between interpreter invocations.
        """
        dumped = json.dumps(self.params, sort_keys=True, cls=ParamsEncoder)
        return str(zlib.adler32(dumped.encode()))

    def __str__(self) -> str:
        return f"{self.history}Params({self.params})"

    def left_merge(self, rhs: Union["Params", Dict[str, Any]]) -> "Params":
        """Layer ``rhs`` over this configuration, field by field

        Args:
            rhs (Union[Params, Dict[str, Any]]): values that take precedence

        Returns:
            Params: a new configuration holding the union, ``rhs`` winning ties
        """
        merged = self.as_flat_dict()
        rhs_params = rhs if isinstance(rhs, Params) else Params(copy.deepcopy(rhs))
        merged.update(rhs_params.as_flat_dict())
        return Params(unflatten(merged), history=self.history)


def layered(
    preset: Optional[str] = None,
    config_file: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Params:
    """Build a run configuration from its layers, lowest priority first

    Args:
        preset (Optional[str]): name of a preset; a config file may name one
            under the ``preset`` key instead
        config_file (Optional[str]): path to a json/yaml/toml configuration
        overrides (Optional[Dict[str, Any]]): flat dotted keys from the command line

    Returns:
        Params: the merged configuration, without the ``preset`` key
    """
    from_file = Params.from_file(config_file) if config_file else Params({})
    preset = preset or from_file.pop("preset", None)
    params = Params.from_preset(preset) if preset else Params({})
    params = params.left_merge(from_file)
    if overrides:
        params = params.left_merge(unflatten(overrides))
    params.pop("preset", None)
    return params


def _replace_none(params: Any) -> Any:
    if params == "None":
        return None
    if isinstance(params, dict):
        for key, value in params.items():
            params[key] = _replace_none(value)
        return params
    if isinstance(params, list):
        return [_replace_none(value) for value in params]
    return params
