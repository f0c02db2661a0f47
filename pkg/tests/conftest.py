"""Pytest fixtures for exercising the stratk CLI."""
from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path
from typing import Dict

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent


def run_stratk(*args: str, env: Dict[str, str] | None = None) -> subprocess.CompletedProcess:
    """Invoke ``python -m stratk`` from the repository root."""
    return subprocess.run(
        [sys.executable, "-m", "stratk", *args],
        cwd=str(REPO_ROOT),
        capture_output=True,
        text=True,
        env=env,
    )


def parse_report(stdout: str) -> dict[str, object]:
    """Parse the single JSON document a verb writes to stdout."""
    return json.loads(stdout)


@pytest.fixture()
def data_dir() -> Path:
    return REPO_ROOT / "data"
