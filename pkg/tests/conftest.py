import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

import gate
from synth import write_sources


@pytest.fixture(scope="session")
def sources(tmp_path_factory):
    """Two foreground manifests (strong-labelled and energy-trimmed) plus backgrounds."""
    root = tmp_path_factory.mktemp("sources")
    fgs, bg = write_sources(root, n_fg_per_source=10, n_bg=4, seed=0)
    return fgs, bg


def pytest_terminal_summary(terminalreporter):
    if gate.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(gate.LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
