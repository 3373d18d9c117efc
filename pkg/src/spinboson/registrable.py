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
"""Name-keyed registries of interchangeable implementations."""
import inspect
import logging
from collections import defaultdict
from typing import Any, Callable, ClassVar, DefaultDict, Dict, List, Type, TypeVar, Union

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.params import Params

logger = logging.getLogger(__name__)

_T = TypeVar("_T")
_RegistrableT = TypeVar("_RegistrableT", bound="Registrable")


class Registrable:
    """Base for families of classes selectable by name from a config.

    A family is opened with ``@Family.root()`` and members join with
    ``@Family.register("name")``. A config ``{"type": "name", **kwargs}``
    then builds the member through :meth:`from_params`.
    """

    _registry: ClassVar[DefaultDict[type, Dict[str, type]]]
    """maps a root class to its members, keyed by name"""
    _names: ClassVar[Dict[type, str]]
    """maps a member back to the name it was registered under"""

    default_name: ClassVar[Union[str, None]] = None
    """member used when a config omits ``type``"""

    @classmethod
    def root(cls) -> Callable[[Type[_T]], Type[_T]]:
        """Start a new family rooted at the decorated class

        Returns:
            Callable[[Type[_T]], Type[_T]]: decorator initializing the registry
        """

        def _root(subclass: Type[_T]) -> Type[_T]:
            subclass._registry = defaultdict(dict)  # type: ignore[attr-defined]
            subclass._names = dict()  # type: ignore[attr-defined]
            return subclass

        return _root

    @classmethod
    def _family(cls) -> type:
        for klass in cls.__mro__:
            if "_registry" in vars(klass):
                return klass
        raise ConfigurationError(f"{cls.__name__} is not part of a registered family")

    @classmethod
    def register(
        cls, name: str, exist_ok: bool = False
    ) -> Callable[[Type[_T]], Type[_T]]:
        """Add the decorated class to the family under ``name``

        Args:
            name (str): key used in configs
            exist_ok (bool): if ``True`` an existing entry is replaced

        Returns:
            Callable[[Type[_T]], Type[_T]]: registering decorator

        Raises:
            ConfigurationError: ``name`` is taken and ``exist_ok`` is ``False``
        """
        family = cls._family()
        registry = cls._registry[family]

        def add_subclass_to_registry(subclass: Type[_T]) -> Type[_T]:
            if not exist_ok and name in registry:
                raise ConfigurationError(
                    f"Cannot register {name} as {family.__name__}; "
                    f"name already in use for {registry[name].__name__}"
                )
            registry[name] = subclass
            cls._names[subclass] = name
            return subclass

        return add_subclass_to_registry

    @classmethod
    def list_available(cls) -> List[str]:
        """Names of every registered member, in registration order"""
        return list(cls._registry[cls._family()])

    @classmethod
    def by_name(cls: Type[_RegistrableT], name: str) -> Type[_RegistrableT]:
        """Look up a member by name

        Raises:
            ConfigurationError: ``name`` is not registered
        """
        registry = cls._registry[cls._family()]
        if name not in registry:
            raise ConfigurationError(
                f"{name!r} is not a registered {cls._family().__name__}; "
                f"available: {', '.join(registry)}"
            )
        return registry[name]  # type: ignore[return-value]

    @classmethod
    def name(cls) -> str:
        """Name the class was registered under

        Raises:
            ConfigurationError: the class was never registered
        """
        if cls not in cls._names:
            raise ConfigurationError(f"{cls.__name__} was not registered")
        return cls._names[cls]

    @classmethod
    def from_params(cls: Type[_RegistrableT], params: Any) -> _RegistrableT:
        """Build a member from ``"name"`` or ``{"type": "name", **kwargs}``

        Args:
            params (Any): member name, dict or ``Params``

        Returns:
            _RegistrableT: the constructed member

        Raises:
            ConfigurationError: unknown member, missing or unknown arguments
        """
        if isinstance(params, str):
            params = Params({"type": params})
        elif isinstance(params, dict):
            params = Params(dict(params))
        elif not isinstance(params, Params):
            raise ConfigurationError(
                f"expected a name or mapping for {cls.__name__}, got {params!r}"
            )
        type_name = params.pop("type", cls.default_name)
        if type_name is None:
            raise ConfigurationError("field is required", field=f"{params.history}type")
        subclass = cls.by_name(type_name)
        signature = inspect.signature(subclass.__init__)
        kwargs: Dict[str, Any] = {}
        for arg in list(signature.parameters.values())[1:]:
            if arg.kind in (arg.VAR_POSITIONAL, arg.VAR_KEYWORD):
                continue
            default = params.DEFAULT if arg.default is arg.empty else arg.default
            kwargs[arg.name] = params.pop(arg.name, default, keep_as_dict=True)
        params.assert_empty(type_name)
        logger.debug(f"building {type_name} from {kwargs}")
        return subclass(**kwargs)

    def to_params(self) -> Dict[str, Any]:
        """Config that rebuilds this member via :meth:`from_params`"""
        signature = inspect.signature(type(self).__init__)
        config: Dict[str, Any] = {"type": self.name()}
        for arg in list(signature.parameters.values())[1:]:
            if hasattr(self, arg.name):
                config[arg.name] = getattr(self, arg.name)
        return config
