import pytest

#: (number, title, passed, detail) appended by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def acceptance():
    def record(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, bool(passed), detail))
        print(f"acceptance {number:2d} {'PASS' if passed else 'FAIL'}: {title} {detail}")
        assert passed, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}")
