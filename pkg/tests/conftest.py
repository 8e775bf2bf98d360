import numpy as np
import pytest
from hypothesis import settings

from dynsamp.signal import binomial_example, cosine_example, synthesize

settings.register_profile("repro", derandomize=True, print_blob=True)
settings.load_profile("repro")


@pytest.fixture
def cosine_pair():
    return cosine_example()


@pytest.fixture
def binomial_pair():
    return binomial_example()


@pytest.fixture
def cosine_ms(cosine_pair):
    a, x = cosine_pair
    return synthesize(a, x, 3, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
