import pytest

from reqsmell import DeterministicLocalProvider, catalog_from_words


@pytest.fixture
def catalog():
    return catalog_from_words(
        ["certain", "appropriate", "adequate", "some", "several", "user-friendly",
         "as far as possible"]
    )


@pytest.fixture
def provider():
    return DeterministicLocalProvider(dim=64)
