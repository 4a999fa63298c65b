import pytest

from spliterkit.runtime import Runtime, RuntimeConfig


@pytest.fixture
def make_runtime():
    """Factory for runtimes that are shut down after the test."""
    started = []

    def make(num_workers=2, **kw):
        rt = Runtime(RuntimeConfig(num_workers=num_workers, **kw))
        started.append(rt)
        return rt

    yield make
    for rt in started:
        rt.shutdown()


@pytest.fixture
def rt2(make_runtime):
    return make_runtime(2)
