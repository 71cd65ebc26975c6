# core/model_family.py
"""
Base class for model families: each family turns a parameter record into a
ModelSpec and is addressable by a string identifier from the CLI.
"""

import dataclasses
from abc import ABC, abstractmethod
from typing import Any, Mapping, Optional, Tuple

from core.errors import ConfigError, InvalidParameterError
from core.lindblad import ModelSpec
from core.logs import setup_logger


def require_non_negative(**values: float):
    for name, value in values.items():
        if value < 0:
            raise InvalidParameterError(f"{name} must be >= 0, got {value}")


class BaseModelFamily(ABC):
    """Base class for all model families"""

    name: str = ''
    params_type: type = type(None)

    def __init__(self):
        self.logger = setup_logger('Models', self.__class__.__name__)
        self._last_model: Optional[ModelSpec] = None

    @property
    def parameter_names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(self.params_type))

    def make_params(self, values: Mapping[str, Any]):
        """Build the family's parameter record from a plain mapping (config or CLI)"""
        unknown = sorted(set(values) - set(self.parameter_names))
        if unknown:
            raise ConfigError(f"Unknown parameter(s) {unknown} for model '{self.name}'")
        try:
            return self.params_type(**dict(values))
        except TypeError as e:
            raise ConfigError(f"Bad parameters for model '{self.name}': {e}")

    def build_from(self, values: Mapping[str, Any]) -> ModelSpec:
        return self.build(self.make_params(values))

    def build(self, params) -> ModelSpec:
        """Validate params and construct the model"""
        if not isinstance(params, self.params_type):
            raise InvalidParameterError(f"{self.name} expects {self.params_type.__name__}, got {type(params).__name__}")
        model = self._build(params)
        self._last_model = model
        self.logger.debug(f"Built {model.label}")
        return model

    @abstractmethod
    def _build(self, params) -> ModelSpec:
        """Return the ModelSpec for validated params"""
        pass

    def get_last_model(self) -> Optional[ModelSpec]:
        return self._last_model
