import pytest

from tugdpp.instances import example_1_1


@pytest.fixture
def ex_f1():
    return example_1_1(1)


@pytest.fixture
def ex_f0():
    return example_1_1(0)
