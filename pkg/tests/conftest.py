import re

import numpy as np
import pytest

from exemplar_leak.synth import SynthConfig, generate_synthetic

_CRITERION_PATTERN = re.compile(
    r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            match = _CRITERION_PATTERN.search(rep.nodeid)
            if not match:
                continue
            if status == "passed" and getattr(rep, "when", "call") != "call":
                continue
            number = int(match.group(1))
            ok = status == "passed" and outcomes.get(number, (True,))[0]
            outcomes[number] = (ok, match.group(2).replace("_", " "))
    if outcomes:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for number in sorted(outcomes):
            ok, name = outcomes[number]
            terminalreporter.write_line(
                f"  criterion {number:2d} ({name}): "
                f"{'PASS' if ok else 'FAIL'}")


def tiny_config(**overrides) -> SynthConfig:
    base = dict(n_categories=3, exemplars_per_category=4,
                trials_per_exemplar=6, n_subjects=1, n_channels=4,
                n_samples=8, category_amplitude=0.3, exemplar_amplitude=0.3,
                noise_sigma=1.0, seed=7)
    base.update(overrides)
    return SynthConfig(**base)


@pytest.fixture
def tiny_dataset():
    return generate_synthetic(tiny_config())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
