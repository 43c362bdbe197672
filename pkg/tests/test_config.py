from fractions import Fraction
from pathlib import Path

import pytest

from altconn.channel import Seeds
from altconn.config import (DEFAULT_DIST, THREADS_ENV_VAR, ConfigError, ExperimentConfig,
                            load_config_file, sim_threads)
from altconn.pipeline import Mode, Scheme
from altconn.states import InvalidDistribution, StateDistribution, StateId
from gfp import FieldTooSmall, NonPrimeField


def test_defaults() -> None:
    cfg = ExperimentConfig()
    assert cfg.p == 5
    assert cfg.dist == DEFAULT_DIST
    assert cfg.n == 9000
    assert cfg.mode is Mode.MONTE_CARLO
    assert cfg.scheme is Scheme.JEMS
    assert cfg.seeds == Seeds(1, 2, 3)
    assert cfg.reps == 1


def test_updated_accepts_flag_and_file_names() -> None:
    cfg = ExperimentConfig().updated({
        'seed-trace': 11,
        'seed_msg': '13',
        'mode': 'proportional',
        'scheme': 'separate',
        'dist': '1,0,0,0,0,0,0',
        'vary': 'c',
        'from': '1/10',
        'to': 0.5,
        'no-resolving-state': True,
        'csv': 'out.csv',
        'n': None,
    })
    assert cfg.seeds == Seeds(11, 2, 13)
    assert cfg.mode is Mode.PROPORTIONAL
    assert cfg.scheme is Scheme.SEPARATE
    assert cfg.dist == StateDistribution.point_mass(StateId.A)
    assert cfg.vary is StateId.C
    assert (cfg.vary_from, cfg.vary_to) == (Fraction(1, 10), Fraction(1, 2))
    assert not cfg.include_resolving_state
    assert cfg.csv == 'out.csv'
    assert cfg.n == 9000


@pytest.mark.parametrize('values', [
    {'bogus': 1},
    {'n': 'many'},
    {'n': True},
    {'n': -1},
    {'reps': 0},
    {'steps': 0},
    {'mode': 'fast'},
    {'vary': 'H'},
    {'from': '3/2'},
    {'to': 'x'},
    {'include_resolving_state': 'yes'},
    {'kind': 'plot'},
    {'dist': 7},
])
def test_updated_rejects(values: dict[str, object]) -> None:
    with pytest.raises(ConfigError):
        ExperimentConfig().updated(values)


@pytest.mark.parametrize('values, error', [
    ({'p': 2}, FieldTooSmall),
    ({'p': 9}, NonPrimeField),
    ({'dist': '1,1,0,0,0,0,0'}, InvalidDistribution),
])
def test_updated_passes_through_domain_errors(values: dict[str, object], error: type) -> None:
    with pytest.raises(error):
        ExperimentConfig().updated(values)


def test_grid() -> None:
    cfg = ExperimentConfig()
    assert cfg.grid() == [Fraction(i, 20) for i in range(9)]
    assert ExperimentConfig(steps=1, vary_from=Fraction(1, 3)).grid() == [Fraction(1, 3)]
    assert ExperimentConfig(steps=3, vary_from=Fraction(1), vary_to=Fraction(0)).grid() == \
        [Fraction(1), Fraction(1, 2), Fraction(0)]


def test_dict_echo_reads_back() -> None:
    cfg = ExperimentConfig(kind='sweep', p=7, n=100, seeds=Seeds(4, 5, 6), vary=StateId.G,
                           vary_to=Fraction(1, 3), include_resolving_state=False)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_load_config_file(tmp_path: Path) -> None:
    path = tmp_path / 'run.toml'
    path.write_text('p = 7\n'
                    'dist = ["0.4", "0.2", "0.1", "0.1", "0.1", 0.05, 0.05]\n'
                    'seed-channel = 9\n'
                    'mode = "proportional"\n', encoding='utf-8')

    cfg = ExperimentConfig().updated(load_config_file(str(path)))
    assert cfg.p == 7
    assert cfg.dist[StateId.F] == Fraction(1, 20)
    assert cfg.seeds.channel == 9
    assert cfg.mode is Mode.PROPORTIONAL


@pytest.mark.parametrize('text', [
    'p = \n',
    '[run]\np = 7\n',
])
def test_load_config_file_rejects(tmp_path: Path, text: str) -> None:
    path = tmp_path / 'bad.toml'
    path.write_text(text, encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config_file(str(path))


def test_load_config_file_missing(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / 'nope.toml'))


@pytest.mark.parametrize('value, expected', [
    (None, None),
    ('', None),
    ('0', None),
    (' 4 ', 4),
])
def test_sim_threads(value: str, expected: int) -> None:
    environ = {} if value is None else {THREADS_ENV_VAR: value}
    assert sim_threads(environ) == expected


@pytest.mark.parametrize('value', ['four', '-2'])
def test_sim_threads_rejects(value: str) -> None:
    with pytest.raises(ConfigError):
        sim_threads({THREADS_ENV_VAR: value})
