"""Certificate cache service."""

from fractions import Fraction

import pytest

from csp_refuter.config import RefuterConfig
from csp_refuter.refuter.pipeline import _resolve_cache
from csp_refuter.services import cache_service
from csp_refuter.services.cache_service import CacheService, deviation_key, dual_key


@pytest.fixture
def service(tmp_path) -> CacheService:
    return CacheService(f"sqlite:///{tmp_path / 'cache.db'}")


@pytest.fixture(autouse=True)
def reset_global(monkeypatch):
    monkeypatch.setattr(cache_service, "_cache_service", None)


class TestKeys:
    def test_deviation_key_is_stable(self):
        first = deviation_key("abc", 0, (0, 1), (1, 0), 1, "exact")
        assert first == deviation_key("abc", 0, (0, 1), (1, 0), 1, "exact")
        assert first != deviation_key("abc", 0, (0, 1), (1, 0), 2, "exact")
        assert first != deviation_key("abc", 1, (0, 1), (1, 0), 1, "exact")

    def test_coefficients_change_the_key(self):
        a = deviation_key("abc", 0, (0,), None, 1, "exact", {(0,): Fraction(1, 3)})
        b = deviation_key("abc", 0, (0,), None, 1, "exact", {(0,): Fraction(1, 2)})
        assert a != b

    def test_dual_key(self):
        key = dual_key((False, True, True, False), 2, (Fraction(1, 2), Fraction(1, 2)), 2, "indicator", True)
        assert key != dual_key((False, True, True, False), 2, (Fraction(1, 2), Fraction(1, 2)), 2, "monomial", True)


class TestCacheService:
    def test_deviation_round_trip(self, service):
        assert service.get_deviation("missing") is None
        service.put_deviation("k1", "abc", 0, {"bound": 0.25, "status": "certified"})
        assert service.get_deviation("k1") == {"bound": 0.25, "status": "certified"}

    def test_put_overwrites(self, service):
        service.put_deviation("k1", "abc", 0, {"bound": 0.25})
        service.put_deviation("k1", "abc", 0, {"bound": 0.125})
        assert service.get_deviation("k1") == {"bound": 0.125}

    def test_dual_round_trip(self, service):
        service.put_dual("d1", "indicator", {"terms": [[[0], "1/2"]]})
        assert service.get_dual("d1") == {"terms": [[[0], "1/2"]]}
        assert service.get_dual("d2") is None

    def test_clear_by_instance(self, service):
        service.put_deviation("k1", "abc", 0, {"bound": 0.1})
        service.put_deviation("k2", "abc", 1, {"bound": 0.2})
        service.put_deviation("k3", "def", 0, {"bound": 0.3})
        service.put_dual("d1", "indicator", {})
        assert service.clear("abc") == 2
        assert service.get_deviation("k3") is not None
        assert service.get_dual("d1") == {}

    def test_clear_everything(self, service):
        service.put_deviation("k1", "abc", 0, {"bound": 0.1})
        service.put_dual("d1", "indicator", {})
        assert service.clear() == 2
        assert service.get_deviation("k1") is None
        assert service.get_dual("d1") is None


class TestResolution:
    def test_no_url_means_no_cache(self, tmp_path):
        cache_service.init_cache_service(f"sqlite:///{tmp_path / 'other.db'}")
        assert _resolve_cache(RefuterConfig(cache_url=None)) is None

    def test_url_reuses_global(self, tmp_path):
        url = f"sqlite:///{tmp_path / 'cache.db'}"
        first = _resolve_cache(RefuterConfig(cache_url=url))
        assert first is cache_service.get_cache_service()
        assert _resolve_cache(RefuterConfig(cache_url=url)) is first

    def test_new_url_replaces_global(self, tmp_path):
        first = _resolve_cache(RefuterConfig(cache_url=f"sqlite:///{tmp_path / 'a.db'}"))
        second = _resolve_cache(RefuterConfig(cache_url=f"sqlite:///{tmp_path / 'b.db'}"))
        assert second is not first
        assert second.url.endswith("b.db")
