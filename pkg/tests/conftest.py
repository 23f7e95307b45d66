import pytest

from ena_kit.ingest import AnalysisConfig, parse_table

from .helpers import ACCEPTANCE_RESULTS, CODES, EXCERPT_ROWS, EXCERPT_HEADER, to_csv


@pytest.fixture
def excerpt_config():
    return AnalysisConfig(
        code_columns=CODES,
        unit_columns=["PID"],
        stanza_columns=["Questions"],
        group_column="Category",
        groups=["Real experience", "Training"],
    )


@pytest.fixture
def excerpt_bytes():
    return to_csv(EXCERPT_HEADER, EXCERPT_ROWS)


@pytest.fixture
def excerpt(excerpt_bytes, excerpt_config):
    return parse_table(excerpt_bytes, excerpt_config)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
