import pytest

from fixedpool import jit_available


@pytest.fixture(params=["numba", "pure"])
def backend(request):
    """Run the test on both kernel lanes."""
    if request.param == "numba" and not jit_available():
        pytest.skip("numba lane unavailable")
    return request.param
