import os
import shlex
import shutil
from pathlib import Path

import pytest

from lustre_horn.driver import compile_text

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

# Files the compiler must accept, and those it must reject.
ACCEPTED = ["stopwatch", "cpt", "solution", "auto", "greycounter", "intloopcounter", "counters", "modes"]
REJECTED = ["failure", "triangle"]


def corpus(name: str) -> str:
    return (CORPUS / f"{name}.lus").read_text()


def compiled(name_or_text: str, **kw):
    text = corpus(name_or_text) if "\n" not in name_or_text else name_or_text
    return compile_text(text, **kw)


def solver_command():
    """The configured Horn solver, or z3 when it is on the PATH."""
    cmd = os.environ.get("HORN_SOLVER", "").strip()
    if cmd:
        return shlex.split(cmd)
    z3 = shutil.which("z3")
    return [z3] if z3 else None


@pytest.fixture
def solver():
    cmd = solver_command()
    if cmd is None:
        pytest.skip("no Horn solver configured (set HORN_SOLVER or put z3 on PATH)")
    return cmd


# -- acceptance report ----------------------------------------------------------

# criterion number -> list of (ok or None when skipped, detail)
ACCEPTANCE: dict[int, list] = {}


def record(criterion: int, ok, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    print(f"criterion {criterion}: {status} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p is not False for p, _ in parts)
        details = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {details}")
