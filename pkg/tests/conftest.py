"""
Fixtures chung cho test suite.
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path (giống main.py) để import src.*
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.ui.cli import CoherenceCLI
from src.utils.file_formats import write_matrix, write_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def app_logger():
    """Logger "CoherenceKit"; handler được gỡ và đóng sau mỗi test."""
    logger = logging.getLogger("CoherenceKit")
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()


@pytest.fixture
def run_cli(tmp_path, capsys, app_logger):
    """
    Chạy CLI với config/log trong tmp_path; trả về (exit code, stdout, stderr).
    """
    def _run(*argv):
        base = ["--config", str(tmp_path / "config.json"), "--log-dir", str(tmp_path / "logs")]
        code = CoherenceCLI().run(base + [str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture
def state_file(tmp_path):
    """Ghi PureState hoặc DensityMatrix ra tmp_path/<name>.json, trả về đường dẫn."""
    def _write(name, state):
        path = tmp_path / f"{name}.json"
        if hasattr(state, "amplitudes"):
            write_state(path, state)
        else:
            write_matrix(path, state)
        return path

    return _write
