import pytest

from core.coeffs import build_hecke_table
from infrastructure.table_cache import TableCache

TEST_N_MAX = 20_000


@pytest.fixture(scope="session")
def hecke_table():
    """tau(1..20000): abbastanza per le spazzate ridotte dei test."""
    return build_hecke_table(12, TEST_N_MAX)


@pytest.fixture
def table_cache():
    """TableCache con capacita' di default, svuotata dopo il test."""
    cache = TableCache.initialize(256 * 1024 * 1024)
    yield cache
    cache.max_bytes = 256 * 1024 * 1024
    cache.clear()


@pytest.fixture(scope="session")
def full_hecke_table():
    """tau(1..1e5): la tabella delle spazzate a piena scala."""
    return build_hecke_table(12, 100_000)
