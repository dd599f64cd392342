import json
import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_SCENE = REPO_ROOT / "demo" / "scene"


def run_cli(*argv, cwd=None):
    """Run the CLI in a subprocess; returns (exit_code, stdout, stderr)."""
    proc = subprocess.run(
        [sys.executable, "-m", "pact", *map(str, argv)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )
    return proc.returncode, proc.stdout, proc.stderr


def without_runtime(report: dict) -> dict:
    """Drop the execution section, the only non-deterministic report part."""
    return {k: v for k, v in report.items() if k != "runtime"}


def read_report(out_dir: Path) -> dict:
    return json.loads((Path(out_dir) / "report.json").read_text())


@pytest.fixture
def cli():
    return run_cli


@pytest.fixture
def demo_scene():
    assert DEMO_SCENE.is_dir(), "bundled demo dump missing"
    return DEMO_SCENE
