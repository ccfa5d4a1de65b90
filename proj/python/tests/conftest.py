import os
import shutil
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def mauc_bin():
    path = os.environ.get("MAUC_BIN") or shutil.which("mauc")
    if not path:
        pytest.skip("mauc executable not found (set MAUC_BIN)")
    return path


@pytest.fixture(scope="session")
def schema_path():
    return Path(__file__).resolve().parents[2] / "docs" / "report.schema.json"
