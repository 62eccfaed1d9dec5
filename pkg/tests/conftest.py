import pytest
from hypothesis import settings

from expmapkit import build_partition, singular_ray

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=200)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def p0():
    """Strip partition of a = 0 (boundaries Im = 2 pi k)."""
    return build_partition(0.0, singular_ray(0.0), K=2)


ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(key, title, ok, detail=""):
        ACCEPTANCE[key] = (title, bool(ok), detail)
        print(f"{key} {title}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.lstrip("#"))):
        title, ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key} {title}  {detail}".rstrip())
