"""Keeps this directory importable so tests can share reference.py and helpers.py."""

from helpers import ACCEPTANCE_VERDICTS


def pytest_terminal_summary(terminalreporter):
    # verdicts printed during the run are swallowed by fd capture, so
    # replay them where tee'd logs will see them
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
