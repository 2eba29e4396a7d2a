import numpy as np
import pytest

from cvmdi import ChannelParams, DetectorParams, Scenario


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def make_scenario(l_ac=0.0, l_bc=0.0, v=40.0, eps=0.002, beta=1.0,
                  eta_d=1.0, v_el=0.0, **kwargs) -> Scenario:
    """Scenario with both fiber legs at 0.2 dB/km and equal source variances."""
    return Scenario(
        v_a=v, v_b=v,
        channel_a=ChannelParams(l_ac, 0.2, eps),
        channel_b=ChannelParams(l_bc, 0.2, eps),
        beta_r=beta,
        detector=DetectorParams(eta_d, v_el),
        **kwargs,
    )


def random_scenario(rng: np.random.Generator) -> Scenario:
    """Random valid scenario with strictly lossy channels."""
    return Scenario(
        v_a=rng.uniform(1.5, 100.0),
        v_b=rng.uniform(1.5, 100.0),
        channel_a=ChannelParams(rng.uniform(0.01, 30.0), 0.2, rng.uniform(0.0, 0.05)),
        channel_b=ChannelParams(rng.uniform(0.01, 30.0), 0.2, rng.uniform(0.0, 0.05)),
    )
