import pytest

from stylediv import _kernels_py, gbdt, textops

try:
    from stylediv import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    k = BACKENDS[request.param]
    monkeypatch.setattr(textops, "kernels", k)
    monkeypatch.setattr(gbdt, "kernels", k)
    return request.param
