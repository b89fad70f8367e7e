import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spdnn.net import Architecture, Network  # noqa: E402


@pytest.fixture
def tiny_net():
    """Two inputs, one hidden layer of width 2, identity first layer, summing output."""
    arch = Architecture(2, (2,))
    return Network.from_layers(arch, [np.eye(2), [[1.0], [1.0]]], [np.zeros(2), [0.0]])
