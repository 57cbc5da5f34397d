import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def quiet():
    """Silence the boundary-condition warning for deliberately inconsistent states."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield
