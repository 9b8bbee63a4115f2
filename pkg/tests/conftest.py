from __future__ import annotations

import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpusmill.pipeline import resolve_tracer  # noqa: E402


def has_compiler() -> bool:
    return shutil.which("g++") is not None


def tracer_or_none() -> list[str] | None:
    return resolve_tracer()


requires_compiler = pytest.mark.skipif(
    not has_compiler(), reason="g++ not available"
)

requires_tracer = pytest.mark.skipif(
    tracer_or_none() is None,
    reason="interpreted-language tracer not installed (secondary component)",
)


@pytest.fixture(scope="session")
def tracer_cmd() -> list[str]:
    cmd = tracer_or_none()
    if cmd is None:
        pytest.skip("interpreted-language tracer not installed (secondary component)")
    return cmd
