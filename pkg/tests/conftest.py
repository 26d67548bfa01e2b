import pytest

_RESULTS = {}


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome == "failed":
        name = report.nodeid.split("::")[-1][len("test_criterion_"):]
        detail = dict(report.user_properties).get("detail", "")
        _RESULTS[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_RESULTS):
        status, detail = _RESULTS[name]
        num, _, label = name.partition("_")
        line = f"criterion {int(num):2d} {label.replace('_', ' ')}: {status}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
