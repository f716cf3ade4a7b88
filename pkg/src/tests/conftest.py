import pytest

import twomem


def pytest_sessionstart(session):
    # set debug mode
    twomem.debug(True)
