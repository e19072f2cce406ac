from __future__ import annotations

import pytest

from rydrouter.client import ServiceClient
from rydrouter.levels import load_level_table


@pytest.fixture(scope="session")
def table():
    return load_level_table()


@pytest.fixture()
def client():
    with ServiceClient() as c:
        yield c


@pytest.fixture()
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""

    def _run(*argv: str):
        from rydrouter.cli import main

        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run
