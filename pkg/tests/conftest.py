import pytest

from pensionlab import bundled_heatmap, bundled_loss_grids, load_presets


@pytest.fixture(scope="session")
def presets():
    return load_presets()


@pytest.fixture(scope="session")
def heatmap():
    return bundled_heatmap()


@pytest.fixture(scope="session")
def published_grids():
    return bundled_loss_grids()
