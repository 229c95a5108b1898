import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roadsense import pipeline  # noqa: E402
from roadsense.telemetry import SynthConfig, synth_drive  # noqa: E402
from roadsense.windows import FeatureTable  # noqa: E402

MIXED_PLAN = ((123.0, "good"), (27.0, "bad"))

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record a criterion outcome for the end-of-run summary."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[name] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("AC"))):
        passed, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}  {detail}")


@pytest.fixture(scope="session")
def synthetic_drive():
    config = SynthConfig(duration_s=900, segments=MIXED_PLAN, pothole_count=25, rng_seed=7)
    return synth_drive(config)


@pytest.fixture(scope="session")
def trained(synthetic_drive):
    drive, events, regimes = synthetic_drive
    road, _ = pipeline.featurize(drive, "road", regimes=regimes)
    pothole, _ = pipeline.featurize(drive, "pothole", events=events)
    bundle, report = pipeline.train_bundle(FeatureTable.from_windows(road), FeatureTable.from_windows(pothole), seed=7)
    return bundle, report
