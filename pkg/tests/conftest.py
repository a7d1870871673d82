import pytest
from threadpoolctl import threadpool_limits


@pytest.fixture(autouse=True, scope="session")
def single_threaded_blas():
    # small-matrix workloads; oversubscribed BLAS pools only add sync cost
    with threadpool_limits(limits=1):
        yield
