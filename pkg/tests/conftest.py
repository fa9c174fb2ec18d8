import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from starcache.channel import FadingParams, Geometry, draw_channel_set  # noqa: E402
from starcache.stars import StarsProfile  # noqa: E402


def random_instance(rng, M=4, N=8):
    """Channels, a random surface profile and random transmit powers."""
    g = Geometry.random_users(rng)
    ch = draw_channel_set(g, FadingParams(), rng, M, N)
    prof = StarsProfile(rng.uniform(size=N), rng.uniform(0, 2 * np.pi, N), rng.uniform(0, 2 * np.pi, N))
    scale = rng.uniform(0.01, 1.0)
    Pb = [scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M)) for _ in range(2)]
    Pc = rng.uniform(0, 1e-6, size=2) * rng.choice([1e-3, 1.0, 1e3])
    return ch, prof, Pb, Pc


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    verdicts = getattr(acceptance, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
