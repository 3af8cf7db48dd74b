import numpy as np
import pytest

from coascent.pathgen import GeneratorConfig, GridPath

# criterion number -> (title, [(part, passed, detail)]), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, list]] = {}


def criterion_line(number: int) -> str:
    title, parts = ACCEPTANCE[number]
    status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
    body = "; ".join(f"{part} {'pass' if ok else 'FAIL'} ({detail})" for part, ok, detail in parts)
    return f"criterion {number} {status}: {title}: {body}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(criterion_line(number))


@pytest.fixture
def power_path():
    """t -> t**0.5 on [0, 4] with 4096 steps."""
    cfg = GeneratorConfig("deterministic-power", 0.5, 4.0, 4096)
    times = np.arange(cfg.steps + 1) * cfg.delta
    return GridPath(cfg.delta, times**0.5, 0.5)
