from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO = Path(__file__).resolve().parent.parent
DEMO = REPO / "demo"

# Filled by test_acceptance: criterion number -> (passed, detail).
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    if not (DEMO / "molecules.jsonl").exists():
        pytest.fail(f"demo corpus missing under {DEMO}; run tools/build_demo.py")
    return DEMO


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
