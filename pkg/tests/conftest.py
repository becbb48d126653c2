import pytest

from lakequery.bench.fixtures import build_fixtures
from lakequery.bench.suite import build_suite
from lakequery.catalog import load_catalog


@pytest.fixture(scope="session")
def lake_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("lake")
    build_fixtures(root, 7)
    return root


@pytest.fixture(scope="session")
def artwork_catalog(lake_root):
    return load_catalog(lake_root / "artwork")


@pytest.fixture(scope="session")
def rotowire_catalog(lake_root):
    return load_catalog(lake_root / "rotowire")


@pytest.fixture(scope="session")
def suite_and_scripts(lake_root):
    return build_suite(lake_root)
