import pytest

from hubspoke.model import generate_synthetic_labeled


@pytest.fixture(scope="session")
def seed42():
    """The frozen seed-42 synthetic 3-blob instance with ground-truth labels."""
    return generate_synthetic_labeled(42)
