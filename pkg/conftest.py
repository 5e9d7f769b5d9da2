import json

import pytest

from cubesquare.circuit import read_circuit
from cubesquare.codes import code_422, code_832
from cubesquare.config import Config


FIXTURES = 'tests/fixtures'


def config():
    with open(f'{FIXTURES}/config.json') as json_file:
        return Config(**json.load(json_file))


@pytest.fixture(scope='module')
def cube():
    return code_832()


@pytest.fixture(scope='module')
def square():
    return code_422()


@pytest.fixture(scope='module')
def example_config():
    return config()


@pytest.fixture(scope='module')
def example_circuit():
    return read_circuit(f'{FIXTURES}/example.lcirc.json')


@pytest.fixture(scope='module')
def golden_ccz():
    with open(f'{FIXTURES}/ccz_832.pcirc.json', 'rb') as f:
        return f.read()
