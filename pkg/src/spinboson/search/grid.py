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
"""Parameter grids for sweeps and phase maps"""
from functools import reduce
from itertools import chain, product
from typing import Any, Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.registrable import Registrable

GridPoint = Tuple[Tuple[int, ...], Dict[str, Any]]
"""``(index along every axis, overrides)``"""


@Registrable.root()
class GridAxis(Registrable):
    """One axis of a grid: a list of values assigned to one or more dotted keys

    Args:
        keys (Union[str, List[str]]): dotted config keys receiving each value
    """

    default_name = "values"

    def __init__(self, keys: Union[str, List[str]]) -> None:
        self.keys = self.str_to_list(keys)
        if not self.keys:
            raise ConfigurationError("an axis needs at least one key", field="grid.keys")

    @property
    def values(self) -> List[float]:  # pragma: no cover
        """Values along the axis

        Raises:
            NotImplementedError: needs to be implemented by child class
        """
        raise NotImplementedError

    def __len__(self) -> int:
        """Number of values on the axis"""
        return len(self.values)

    def __call__(self) -> List[Dict[str, Any]]:
        """One override dict per value"""
        return [{k: v for k in self.keys} for v in self.values]

    @staticmethod
    def str_to_list(str_or_list: Union[str, Sequence[str]]) -> List[str]:
        """Promote a single key to a list"""
        if isinstance(str_or_list, str):
            return [str_or_list]
        return list(str_or_list)


@GridAxis.register("values")
class ValuesGrid(GridAxis):
    """Explicit values

    Args:
        keys (Union[str, List[str]]): dotted config keys
        values (List[float]): values to visit, in order
    """

    def __init__(self, keys: Union[str, List[str]], values: List[float]) -> None:
        super().__init__(keys)
        if not values:
            raise ConfigurationError("an axis needs at least one value", field="grid.values")
        self._values = [float(v) for v in values]

    @property
    def values(self) -> List[float]:
        """Values along the axis"""
        return list(self._values)


@GridAxis.register("linear")
class LinearGrid(GridAxis):
    """``num`` evenly spaced values from ``start`` to ``stop`` inclusive

    Args:
        keys (Union[str, List[str]]): dotted config keys
        start (float): first value
        stop (float): last value
        num (int): number of values
    """

    def __init__(self, keys: Union[str, List[str]], start: float, stop: float, num: int) -> None:
        super().__init__(keys)
        if int(num) < 1:
            raise ConfigurationError(f"must be at least 1, got {num}", field="grid.num")
        self.start, self.stop, self.num = float(start), float(stop), int(num)

    @property
    def values(self) -> List[float]:
        """Values along the axis"""
        return np.linspace(self.start, self.stop, self.num).tolist()


@GridAxis.register("log")
class LogGrid(LinearGrid):
    """``num`` logarithmically spaced values from ``start`` to ``stop``

    Raises:
        ConfigurationError: non-positive end points
    """

    def __init__(self, keys: Union[str, List[str]], start: float, stop: float, num: int) -> None:
        super().__init__(keys, start, stop, num)
        if self.start <= 0 or self.stop <= 0:
            raise ConfigurationError("log axes need positive end points", field="grid.start")

    @property
    def values(self) -> List[float]:
        """Values along the axis"""
        return np.geomspace(self.start, self.stop, self.num).tolist()


class GridSearch:
    """``itertools.product`` of several axes

    Args:
        axes (List[GridAxis]): outermost axis first
    """

    def __init__(self, axes: List[GridAxis]) -> None:
        self.axes = axes

    @classmethod
    def from_params(cls, configs: Sequence[Any]) -> "GridSearch":
        """Build every axis from its config"""
        return cls([GridAxis.from_params(config) for config in configs])

    def __len__(self) -> int:
        """Number of grid points"""
        return reduce(lambda i, j: i * j, map(len, self.axes), 1)

    @staticmethod
    def tuple_to_dict(tpl: Tuple[Dict[str, Any], ...]) -> Dict[str, Any]:
        """Merge one override dict per axis"""
        return dict(chain(*map(lambda i: i.items(), tpl)))

    def __call__(self) -> List[Dict[str, Any]]:
        """Overrides of every grid point, last axis fastest"""
        return [self.tuple_to_dict(tpl) for tpl in product(*[axis() for axis in self.axes])]

    def __iter__(self) -> Iterator[GridPoint]:
        """``(indices, overrides)`` of every grid point, last axis fastest"""
        ranges = [range(len(axis)) for axis in self.axes]
        for indices, tpl in zip(product(*ranges), product(*[axis() for axis in self.axes])):
            yield tuple(indices), self.tuple_to_dict(tpl)
