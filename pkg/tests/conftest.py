import pathlib

import pytest

from lobe import Kernel

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def kernel():
    return Kernel()


@pytest.fixture
def events(kernel):
    collected = []
    kernel.add_event_sink(collected.append)
    return collected


def fixture_path(name):
    return str(FIXTURES / name)


def load_fixture(kernel, name):
    return kernel.load_file(fixture_path(name))
