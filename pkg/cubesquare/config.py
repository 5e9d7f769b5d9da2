from dataclasses import dataclass, field, fields, replace as _replace
from typing import Optional
import json
import os

from . import logger, CONFIG_ENV, DEFAULT_CAPACITY, STRATEGIES
from .compiler import ScheduleOptions
from .simulator import NoiseModel


NOISE_KEYS = ('p1', 'p2', 'p_meas', 'p_prep')

CHOICES = {
    'strategy': tuple(STRATEGIES),
    'corrections': ('apply', 'frame-track'),
    'relocation': ('swap', 'teleport'),
    'rounds': ('gadget', 'end')}


def _default_noise() -> dict:
    return {key: 0.0 for key in NOISE_KEYS}


@dataclass(frozen=True)
class Config:
    capacity: int = DEFAULT_CAPACITY
    noise: dict = field(default_factory=_default_noise)
    strategy: str = 'sequential'
    corrections: str = 'apply'
    relocation: str = 'swap'
    rounds: str = 'gadget'
    seed: int = 1234
    resample_seed: int = 4321
    bootstrap: int = 1000
    workers: int = 0
    output_dir: str = '.'

    def _strict_type_check(self):
        for (name, field_type) in self.__annotations__.items():
            if not isinstance(self.__dict__[name], field_type):
                current_type = type(self.__dict__[name])
                raise TypeError(
                    f'{name} is of type `{current_type}` but should be of '
                    f'type `{field_type}`')

    def __post_init__(self):
        self._strict_type_check()
        for name, values in CHOICES.items():
            if getattr(self, name) not in values:
                raise ValueError(
                    f'{name} must be one of {values}, got '
                    f'{getattr(self, name)!r}')
        for key in self.noise:
            if key not in NOISE_KEYS:
                raise KeyError(
                    f'Error in configuration file: unknown noise rate '
                    f'\'{key}\', expected one of {NOISE_KEYS}')
        if self.capacity < 1:
            raise ValueError(f'capacity must be positive, got {self.capacity}')
        if self.bootstrap < 0:
            raise ValueError(
                f'bootstrap must not be negative, got {self.bootstrap}')
        if self.workers < 0:
            raise ValueError(
                f'workers must not be negative, got {self.workers}')
        # Fail early on out-of-range rates
        _ = self.noise_model

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(**{**_default_noise(), **self.noise})

    def schedule_options(self, **overrides) -> ScheduleOptions:
        options = {
            'corrections': self.corrections,
            'relocation': self.relocation,
            'rounds': self.rounds}
        options.update(overrides)
        return ScheduleOptions(**options)

    def replace(self, **overrides) -> 'Config':
        """Copy with every override that is not None applied"""
        overrides = {k: v for k, v in overrides.items() if v is not None}
        if isinstance(overrides.get('noise'), NoiseModel):
            model = overrides['noise']
            overrides['noise'] = {k: getattr(model, k) for k in NOISE_KEYS}
        return _replace(self, **overrides)


def _coerce(name: str, value):
    # JSON has no float/int distinction for rates
    if name == 'noise' and isinstance(value, dict):
        return {k: float(v) if isinstance(v, int) else v
                for k, v in value.items()}
    return value


def read_config(path: Optional[str] = None) -> Config:
    """Load a Config from a JSON object.

    The path falls back to the CUBESQUARE_CONFIG environment variable. A
    missing environment file gives the defaults, a missing explicit path
    raises FileNotFoundError.
    """
    explicit = path is not None
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        logger.debug('No configuration file given, using defaults')
        return Config()
    if not os.path.exists(path) and not explicit:
        logger.warning(
            f'Configuration file \'{path}\' from {CONFIG_ENV} not found, '
            f'using defaults')
        return Config()

    with open(path) as json_file:
        data = json.load(json_file)
    if not isinstance(data, dict):
        raise KeyError(
            f'Error in configuration file: expected an object in {path}')

    known = {f.name for f in fields(Config)}
    for k in data:
        if k not in known:
            raise KeyError(
                f'Error in configuration file: unknown key \'{k}\' in {path}')
    return Config(**{k: _coerce(k, v) for k, v in data.items()})


__all__ = [Config, read_config, NOISE_KEYS]
