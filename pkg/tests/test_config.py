"""Tests for cubesquare/config.py"""
import json
import os

import pytest

from cubesquare import CONFIG_ENV, DEFAULT_CAPACITY
from cubesquare.config import Config, read_config
from cubesquare.runner import resolve_workers
from cubesquare.simulator import NoiseModel


def test_defaults(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    config = read_config()
    assert config == Config()
    assert config.capacity == DEFAULT_CAPACITY
    assert config.noise_model.is_noiseless
    assert config.schedule_options().corrections == 'apply'
    assert config.workers == 0
    assert resolve_workers(config.workers) == (os.cpu_count() or 1)


def test_read_config(example_config):
    config = read_config('tests/fixtures/config.json')
    assert config == example_config
    assert config.capacity == 24
    assert config.strategy == 'mid'
    assert config.noise_model == NoiseModel(0.0001, 0.001, 0.001, 0.001)
    options = config.schedule_options(catalyst_gamma=0.5)
    assert options.corrections == 'frame-track'
    assert options.catalyst_gamma == 0.5


def test_config_from_environment(tmp_path, monkeypatch):
    path = tmp_path / 'cubesquare.json'
    path.write_text(json.dumps({'seed': 99, 'noise': {'p2': 0}}))
    monkeypatch.setenv(CONFIG_ENV, str(path))
    config = read_config()
    assert config.seed == 99
    assert config.noise == {'p2': 0.0}

    # a stale environment path falls back to the defaults
    monkeypatch.setenv(CONFIG_ENV, str(tmp_path / 'missing.json'))
    assert read_config() == Config()
    with pytest.raises(FileNotFoundError):
        read_config(str(tmp_path / 'missing.json'))


def test_replace(example_config):
    config = example_config.replace(
        strategy='fast', seed=None, noise=NoiseModel(p1=0.01))
    assert config.strategy == 'fast'
    assert config.seed == example_config.seed
    assert config.noise_model.p1 == 0.01
    assert config.noise_model.p2 == 0.0
    assert example_config.strategy == 'mid'


@pytest.mark.parametrize('document, error', [
    ({'colour': 'blue'}, KeyError),
    ({'noise': {'p3': 0.1}}, KeyError),
    ({'strategy': 'eager'}, ValueError),
    ({'capacity': 0}, ValueError),
    ({'bootstrap': -1}, ValueError),
    ({'noise': {'p1': 2.0}}, ValueError),
    ({'seed': 'seven'}, TypeError),
    ({'workers': 1.5}, TypeError),
    ({'workers': -1}, ValueError),
])
def test_invalid_documents(tmp_path, document, error):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(document))
    with pytest.raises(error):
        read_config(str(path))


def test_document_must_be_an_object(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('[1, 2]')
    with pytest.raises(KeyError):
        read_config(str(path))
