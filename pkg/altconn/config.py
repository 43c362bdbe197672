"""
Experiment configuration.

Settings come from three places, in increasing order of precedence: the
defaults below, a flat TOML file (--config), and command-line flags. The
file uses the flag names as keys, with either dashes or underscores:

    p = 7
    dist = "2/9,2/9,1/9,1/9,1/9,1/9,1/9"
    n = 9000
    mode = "proportional"
    seed-trace = 11
"""

import os
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping, Optional, Union

from gfp import DEFAULT_P, FieldSpec

from .channel import Seeds
from .pipeline import Mode, Scheme
from .states import InvalidDistribution, StateDistribution, StateId

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ['DEFAULT_DIST', 'THREADS_ENV_VAR', 'ConfigError', 'ExperimentConfig',
           'load_config_file', 'sim_threads']

THREADS_ENV_VAR = 'SIM_THREADS'

# The distribution that maximizes the sum-capacity.
DEFAULT_DIST = StateDistribution.parse('2/9,2/9,1/9,1/9,1/9,1/9,1/9')

_KINDS = ('simulate', 'sweep', 'jess-demo', 'bounds')


class ConfigError(ValueError):
    """Raised for a bad configuration file or setting. A subclass of
    ValueError."""
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = 'simulate'
    p: int = DEFAULT_P
    dist: StateDistribution = DEFAULT_DIST
    n: int = 9000
    mode: Mode = Mode.MONTE_CARLO
    scheme: Scheme = Scheme.JEMS
    seeds: Seeds = field(default_factory=Seeds)
    reps: int = 1

    # sweep
    vary: StateId = StateId.B
    vary_from: Fraction = Fraction(0)
    vary_to: Fraction = Fraction(2, 5)
    steps: int = 9

    # jess-demo
    seed: int = 0
    include_resolving_state: bool = True

    out: Optional[str] = None
    csv: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f'Unknown experiment kind {self.kind!r}')

        # Raises FieldTooSmall or NonPrimeField, which callers report as-is.
        FieldSpec.checked(self.p)

        if self.n < 0:
            raise ConfigError(f'n must be non-negative, got {self.n}')

        if self.reps < 1:
            raise ConfigError(f'reps must be at least 1, got {self.reps}')

        if self.steps < 1:
            raise ConfigError(f'steps must be at least 1, got {self.steps}')

        for name, v in (('from', self.vary_from), ('to', self.vary_to)):
            if not 0 <= v <= 1:
                raise ConfigError(f'Sweep bound {name} = {v} is outside [0, 1]')

    @property
    def spec(self) -> FieldSpec:
        return FieldSpec(self.p)

    def grid(self) -> list[Fraction]:
        """The values the swept component takes, evenly spaced and
        inclusive of both ends."""
        if self.steps == 1:
            return [self.vary_from]

        step = (self.vary_to - self.vary_from) / (self.steps - 1)
        return [self.vary_from + i * step for i in range(self.steps)]

    def to_dict(self) -> dict[str, Any]:
        """A JSON-friendly echo of the settings. Fractions are written as
        strings so they read back exactly."""
        return {
            'kind': self.kind,
            'p': self.p,
            'dist': self.dist.to_strings(),
            'n': self.n,
            'mode': str(self.mode),
            'scheme': str(self.scheme),
            'seed_trace': self.seeds.trace,
            'seed_channel': self.seeds.channel,
            'seed_msg': self.seeds.message,
            'reps': self.reps,
            'vary': str(self.vary),
            'from': str(self.vary_from),
            'to': str(self.vary_to),
            'steps': self.steps,
            'seed': self.seed,
            'include_resolving_state': self.include_resolving_state,
            'out': self.out,
            'csv': self.csv,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> 'ExperimentConfig':
        return cls().updated(d)

    def updated(self, values: Mapping[str, Any]) -> 'ExperimentConfig':
        """Returns a copy with the given settings applied. Keys are flag or
        config-file names; None values are skipped."""
        changes: dict[str, Any] = {}
        seeds = self.seeds
        for raw_key, v in values.items():
            if v is None:
                continue

            key = raw_key.replace('-', '_')
            try:
                if key in ('p', 'n', 'reps', 'steps', 'seed'):
                    changes[key] = _as_int(key, v)
                elif key == 'dist':
                    changes['dist'] = _as_dist(v)
                elif key == 'mode':
                    changes['mode'] = Mode(v)
                elif key == 'scheme':
                    changes['scheme'] = Scheme(v)
                elif key == 'seed_trace':
                    seeds = replace(seeds, trace=_as_int(key, v))
                elif key == 'seed_channel':
                    seeds = replace(seeds, channel=_as_int(key, v))
                elif key in ('seed_msg', 'seed_message'):
                    seeds = replace(seeds, message=_as_int(key, v))
                elif key == 'vary':
                    changes['vary'] = StateId[str(v).upper()]
                elif key in ('from', 'vary_from'):
                    changes['vary_from'] = Fraction(str(v))
                elif key in ('to', 'vary_to'):
                    changes['vary_to'] = Fraction(str(v))
                elif key == 'include_resolving_state':
                    changes[key] = _as_bool(key, v)
                elif key == 'no_resolving_state':
                    changes['include_resolving_state'] = not _as_bool(key, v)
                elif key in ('kind', 'out', 'csv'):
                    changes[key] = str(v)
                else:
                    raise ConfigError(f'Unknown setting {raw_key!r}')
            except (ConfigError, InvalidDistribution):
                raise
            except (KeyError, ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f'Bad value {v!r} for {raw_key}: {exc}') from exc

        changes['seeds'] = seeds
        return replace(self, **changes)


def _as_int(key: str, v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ConfigError(f'{key} must be an integer, got {v!r}')

    return int(v)


def _as_bool(key: str, v: Any) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f'{key} must be true or false, got {v!r}')

    return v


def _as_dist(v: Union[str, list[Any], StateDistribution]) -> StateDistribution:
    if isinstance(v, StateDistribution):
        return v

    if isinstance(v, str):
        return StateDistribution.parse(v)

    if isinstance(v, list):
        # TOML floats lose exactness; strings and ints do not.
        return StateDistribution.from_values(str(x) for x in v)

    raise ConfigError(f'dist must be a string or list, got {v!r}')


def load_config_file(path: str) -> dict[str, Any]:
    """Reads a flat TOML config file. Nested tables are rejected."""
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f'Cannot read config file {path}: {exc}') from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f'Config file {path} is not valid TOML: {exc}') from exc

    for k, v in data.items():
        if isinstance(v, dict):
            raise ConfigError(f'Config file {path} has a nested table {k!r}; keys must be flat')

    return data


def sim_threads(environ: Mapping[str, str] = os.environ) -> Optional[int]:
    """The worker thread cap from SIM_THREADS, or None for automatic."""
    raw = environ.get(THREADS_ENV_VAR, '').strip()
    if not raw:
        return None

    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f'{THREADS_ENV_VAR} must be an integer, got {raw!r}')

    if n < 0:
        raise ConfigError(f'{THREADS_ENV_VAR} must be non-negative, got {n}')

    return n or None
