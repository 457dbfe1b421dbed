import functools
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from necklace import builtin  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

NAMES = ("fig1a", "fig1b", "ex21", "ex23L", "ex23R")


@functools.lru_cache(maxsize=None)
def system(name: str):
    """Built-ins are immutable, so one instance per session is shared."""
    s = builtin(name)
    s.automaton  # build nodes and automaton once
    return s


@pytest.fixture(params=NAMES)
def any_system(request):
    return system(request.param)
