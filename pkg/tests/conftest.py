import pytest

from promise.corpus import default_theory
from promise.prover import ToyProver
from promise.trace_index import build_index


@pytest.fixture(scope="session")
def theory():
    return default_theory()


@pytest.fixture(scope="session")
def prover(theory):
    return ToyProver(theory)


@pytest.fixture(scope="session")
def index(prover):
    return build_index(prover)
