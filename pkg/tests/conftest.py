import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hawkes_risk import ExpKernelParams, ExponentialClaims, ExponentialKernel


@pytest.fixture
def fig1_kernel():
    """Figure-1 caption kernel: alpha=0.3, beta=0.5."""
    return ExponentialKernel(0.3, 0.5)


@pytest.fixture
def fig1_claims():
    """Figure-1 caption claims: exponential with rate 1."""
    return ExponentialClaims(1.0)


@pytest.fixture
def fig1_params():
    return ExpKernelParams(0.3, 0.5)
