import json
import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from pcfbands.cell import CellSpec, Disc, Slab

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDENS = Path(__file__).parent / "goldens"


def golden(name: str) -> dict:
    return json.loads((GOLDENS / f"{name}.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def disc_cell():
    return CellSpec(Disc(0.3), 2.0, 1.0)


@pytest.fixture(scope="session")
def slab_cell():
    return CellSpec(Slab(0.25, 0.75), 2.0, 1.0)


# acceptance verdict lines, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
