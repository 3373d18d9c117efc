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
"""Exception for an invalid run configuration."""
from typing import Optional


class ConfigurationError(Exception):
    """Raised when a configuration value is missing, unknown or out of range.

    Args:
        message (str): explanation of what was wrong
        field (Optional[str]): dotted path of the offending field,
            e.g. ``model.alpha``, prepended to the message when given
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__()
        self.field = field
        self.message = f"{field}: {message}" if field else message

    def __str__(self) -> str:
        return self.message
