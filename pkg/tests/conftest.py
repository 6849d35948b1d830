import sys
import warnings
from pathlib import Path

import pytest

# make the sibling oracle helpers importable regardless of invocation dir
sys.path.insert(0, str(Path(__file__).resolve().parent))

warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture(scope="session")
def dipole_far_field():
    """Hertzian-dipole far-field pattern (shared: it is the most expensive
    oracle and several tests read different properties of it)."""
    from oracles import dipole_pattern
    return dipole_pattern()
