from functools import lru_cache

from paglob.manifest import fixture_names, load_fixture


@lru_cache(maxsize=None)
def fx(name):
    return load_fixture(name)


def metric_fixtures():
    return [n for n in fixture_names() if fx(n).action is not None and fx(n).space.metric is not None]


def monoid_fixtures():
    return [n for n in fixture_names() if fx(n).monoid_action is not None]


def group_fixtures():
    return [n for n in metric_fixtures() if fx(n).presentation.inverses is not None]


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
