import pytest

from polarsim import device, stark

import helpers


@pytest.fixture(scope="session")
def paper_field():
    return device.paper_field_profile()


@pytest.fixture(scope="session")
def layout1(paper_field):
    return device.build_layout(stark.KCS, device.PAPER_TRAP, paper_field, 1)


@pytest.fixture(scope="session")
def layout2(paper_field):
    return device.build_layout(stark.KCS, device.PAPER_TRAP, paper_field, 2)


@pytest.fixture(scope="session")
def layout3(paper_field):
    return device.build_layout(stark.KCS, device.PAPER_TRAP, paper_field, 3)


@pytest.fixture(scope="session")
def echo_layout3():
    return helpers.echo_layout(3)


@pytest.fixture(scope="session")
def echo_layout4():
    return helpers.echo_layout(4)
