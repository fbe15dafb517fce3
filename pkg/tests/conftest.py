import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sara.config import SaraConfig
from sara.synth import generate_orbit_scene, render_features


@pytest.fixture(scope="session")
def orbit20():
    """Noise-free 20-camera orbit scene, shared across modules."""
    return generate_orbit_scene(n_cameras=20, n_points=400, radius=5.0, seed=0)


@pytest.fixture(scope="session")
def orbit20_features(orbit20):
    return render_features(orbit20)


@pytest.fixture(scope="session")
def default_config():
    return SaraConfig()
