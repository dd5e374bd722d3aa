import json
import time
from pathlib import Path

import pytest

from exactinfer.experiments import ExperimentConfig, run_experiment

CONFIG_DIR = Path(__file__).resolve().parent.parent / "experiments" / "acceptance"
_VERDICTS: dict[int, tuple[bool, str]] = {}


def record_verdict(criterion: int, ok: bool, detail: str) -> None:
    _VERDICTS[criterion] = (ok, detail)
    print(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        ok, detail = _VERDICTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


class ReportCache:
    """First run of every checked-in acceptance configuration, with its wall time."""

    def __init__(self):
        self._runs = {}

    def names(self):
        return sorted(p.stem for p in CONFIG_DIR.glob("*.json"))

    def config(self, name: str) -> ExperimentConfig:
        return ExperimentConfig.from_dict(json.loads((CONFIG_DIR / f"{name}.json").read_text()))

    def get(self, name: str):
        if name not in self._runs:
            start = time.perf_counter()
            report = run_experiment(self.config(name))
            self._runs[name] = (report, time.perf_counter() - start)
        return self._runs[name]


@pytest.fixture(scope="session")
def acceptance_runs():
    return ReportCache()
