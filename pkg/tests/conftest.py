import pytest

from vortex_induct.config import load_config


@pytest.fixture(scope="session")
def fig2():
    return load_config()


@pytest.fixture(scope="session")
def tube(fig2):
    return fig2.tube_model()


@pytest.fixture(scope="session")
def electron(fig2):
    return fig2.electron_state()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, verdict, detail in sorted(lines):
        terminalreporter.write_line(f"[{'PASS' if verdict == 'PASS' else 'FAIL'}] "
                                    f"criterion {num:2d}: {detail}")
