"""Pipeline orchestration: compile a source file to Horn clauses and, when a
solver is configured, check the requested property.

Stage order is fixed: parse, type and clock checks, automaton expansion,
normalization with scheduling, state model, Horn emission. The first stage
that reports diagnostics stops the pipeline and nothing is written.
"""

from __future__ import annotations

import enum
import logging
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ast as A
from .analysis import clock_check, type_check
from .automaton import expand_all
from .diagnostics import UNKNOWN_NODE, CompileError, Diagnostic, error
from .frontend import parse_program, pretty_print
from .horn import HornSystem, encode_program, write_smtlib
from .inlining import inline_calls
from .normalization import NormalizedProgram, normalize_program, program_to_str
from .state_model import StateTree, compute_all, tree_to_str

log = logging.getLogger(__name__)

SOLVER_ENV = "HORN_SOLVER"
DEFAULT_TIMEOUT = 60.0


class ExitCode(enum.IntEnum):
    OK = 0
    USAGE = 1
    DIAGNOSTICS = 2
    INVALID = 3
    UNAVAILABLE = 4


class VerificationOutcome(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"
    UNAVAILABLE = "solver-unavailable"

    @property
    def exit_code(self) -> ExitCode:
        return {
            VerificationOutcome.VALID: ExitCode.OK,
            VerificationOutcome.INVALID: ExitCode.INVALID,
        }.get(self, ExitCode.UNAVAILABLE)


class UsageError(Exception):
    """Inconsistent configuration or unreadable input."""


@dataclass
class CompilerConfig:
    input: Path
    main: Optional[str] = None
    horn: Optional[Path] = None
    emit_clocked: Optional[Path] = None
    emit_normalized: Optional[Path] = None
    emit_state_tree: Optional[Path] = None
    inline: bool = False
    prove: Optional[tuple[str, str]] = None  # (node, boolean output)
    solver: Optional[list[str]] = None
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        self.input = Path(self.input)
        if self.prove is not None:
            if self.horn is None:
                raise UsageError("--prove requires --horn")
            if self.main is None:
                self.main = self.prove[0]
            elif self.main != self.prove[0]:
                raise UsageError(f"--prove node {self.prove[0]!r} differs from --node {self.main!r}")
        if self.timeout <= 0:
            raise UsageError("--timeout must be positive")


def parse_prove(text: str) -> tuple[str, str]:
    node, sep, out = text.partition(":")
    if not sep or not node or not out:
        raise UsageError(f"--prove expects <node>:<output>, got {text!r}")
    return node, out


def solver_from_env() -> Optional[list[str]]:
    cmd = os.environ.get(SOLVER_ENV, "").strip()
    return shlex.split(cmd) if cmd else None


@dataclass
class PipelineResult:
    source: Optional[A.Program] = None
    expanded: Optional[A.Program] = None
    normalized: Optional[NormalizedProgram] = None
    trees: dict[str, StateTree] = field(default_factory=dict)
    horn: Optional[HornSystem] = None
    artifacts: dict[Path, str] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    outcome: Optional[VerificationOutcome] = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def exit_code(self) -> ExitCode:
        if self.diagnostics:
            return ExitCode.DIAGNOSTICS
        if self.outcome is not None:
            return self.outcome.exit_code
        return ExitCode.OK


def generated_nodes(source: A.Program, expanded: A.Program) -> list[str]:
    """Nodes introduced by the automaton pass."""
    names = {n.name for n in source.nodes}
    return [n.name for n in expanded.nodes if n.name not in names]


def compile_text(text: str, main: Optional[str] = None, prove: Optional[str] = None,
                 inline: bool = False) -> PipelineResult:
    """Run every stage on ``text``; raises CompileError on diagnostics."""
    res = PipelineResult()
    res.source = parse_program(text)
    type_check(res.source)
    clock_check(res.source)
    if main is not None and res.source.node(main) is None:
        raise error(UNKNOWN_NODE, f"unknown main node {main!r}")
    res.expanded = expand_all(res.source)
    # the generated program must pass the same checks; a failure is a bug
    type_check(res.expanded)
    clock_check(res.expanded)
    res.normalized = normalize_program(res.expanded)
    if inline:
        res.normalized = inline_calls(res.normalized, generated_nodes(res.source, res.expanded))
    res.warnings = list(res.normalized.warnings)
    res.trees = compute_all(res.normalized)
    res.horn = encode_program(res.normalized, main, prove)
    return res


def write_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename.

    Symbolic links are followed, so the link survives and its target is
    replaced. Devices and pipes (``/dev/stdout``) are written in place,
    since renaming over them would destroy them.
    """
    path = Path(os.path.realpath(path))
    if path.exists() and not path.is_file():
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        return
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_pipeline(cfg: CompilerConfig) -> PipelineResult:
    try:
        text = cfg.input.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.input}: {exc.strerror}") from exc
    prove_out = cfg.prove[1] if cfg.prove else None
    try:
        res = compile_text(text, cfg.main, prove_out, cfg.inline)
    except CompileError as exc:
        return PipelineResult(diagnostics=exc.diagnostics)
    if cfg.emit_clocked:
        res.artifacts[cfg.emit_clocked] = pretty_print(res.expanded)
    if cfg.emit_normalized:
        res.artifacts[cfg.emit_normalized] = program_to_str(res.normalized)
    if cfg.emit_state_tree:
        names = [cfg.main] if cfg.main else [n.name for n in res.normalized.nodes]
        res.artifacts[cfg.emit_state_tree] = "\n".join(tree_to_str(res.trees[n]) for n in names) + "\n"
    if cfg.horn:
        res.artifacts[cfg.horn] = write_smtlib(res.horn)
    for path, content in res.artifacts.items():
        try:
            write_atomic(path, content)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc.strerror}") from exc
    if cfg.prove is not None and cfg.solver:
        res.outcome = invoke_solver(cfg, cfg.horn)
    return res


def invoke_solver(cfg: CompilerConfig, horn_file: Path) -> VerificationOutcome:
    """Run the configured solver on ``horn_file`` and classify its answer.

    The command template receives the file path in place of ``{file}``, or
    as a last argument. The ERR query is unreachable (``unsat``) exactly
    when the property holds.
    """
    if not cfg.solver:
        return VerificationOutcome.UNAVAILABLE
    if any("{file}" in a for a in cfg.solver):
        cmd = [a.replace("{file}", str(horn_file)) for a in cfg.solver]
    else:
        cmd = list(cfg.solver) + [str(horn_file)]
    log.info("running %s", shlex.join(cmd))
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=cfg.timeout)
    except (FileNotFoundError, PermissionError) as exc:
        log.warning("solver not runnable: %s", exc)
        return VerificationOutcome.UNAVAILABLE
    except subprocess.TimeoutExpired:
        log.warning("solver timed out after %ss", cfg.timeout)
        return VerificationOutcome.UNKNOWN
    for line in proc.stdout.splitlines():
        answer = line.strip()
        if answer == "unsat":
            return VerificationOutcome.VALID
        if answer == "sat":
            return VerificationOutcome.INVALID
        if answer:
            break
    log.warning("solver answered %r", proc.stdout.strip()[:200] or proc.stderr.strip()[:200])
    return VerificationOutcome.UNKNOWN
