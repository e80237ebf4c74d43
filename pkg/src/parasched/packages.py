"""Task packages: the step text format, its parser/serializer and the corpus loader.

A package block looks like::

    kitchen scene
    Package A: Make carrot slices
    A1: pick(source="table", target="carrots")(Single arm, 5 seconds)
    A2: place(source="carrots", target="cutting_board")(Single arm, 7 seconds)
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .skills import SKILLS, Category, SkillSpec

log = logging.getLogger(__name__)

DIFFICULTIES = ("easy", "medium", "hard")

_IDENT = re.compile(r"[A-Za-z0-9_]+")
_INT = re.compile(r"[0-9]+")
_STEP_ID = re.compile(r"([A-Z])([0-9]+)")
_HEADER = re.compile(r"Package ([A-Za-z]+): (.+)")
_SCENE = re.compile(r"(.+?) scene")
_DIFFICULTY = re.compile(r"#\s*difficulty:\s*(\S+)\s*")


class ParseError(ValueError):
    """Malformed package or DAG text. ``offset`` is a byte offset into the input."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class UnknownSkillError(ParseError):
    def __init__(self, token: str, offset: int = 0):
        super().__init__(f"unknown skill {token!r}", offset)
        self.token = token


@dataclass(frozen=True)
class Call:
    """A parsed ``skill(source="..", target="..")`` invocation."""

    skill: SkillSpec
    source: str | None
    target: str

    def text(self) -> str:
        if self.source is None:
            return f'{self.skill.name}(target="{self.target}")'
        return f'{self.skill.name}(source="{self.source}", target="{self.target}")'


@dataclass(frozen=True)
class PackageStep:
    step_id: str
    skill: str
    source: str | None
    target: str
    arm_count: int
    duration: int

    @property
    def spec(self) -> SkillSpec:
        return SKILLS[self.skill]

    @property
    def category(self) -> Category:
        return SKILLS[self.skill].category

    def call_text(self) -> str:
        return Call(self.spec, self.source, self.target).text()

    def to_text(self) -> str:
        arms = "Dual" if self.arm_count == 2 else "Single"
        return f"{self.step_id}: {self.call_text()}({arms} arm, {self.duration} seconds)"


@dataclass(frozen=True)
class TaskPackage:
    package_id: str
    title: str
    steps: tuple[PackageStep, ...]
    scene: str = ""

    def to_text(self) -> str:
        lines = [f"{self.scene} scene"] if self.scene else []
        lines.append(f"Package {self.package_id}: {self.title}")
        lines.extend(s.to_text() for s in self.steps)
        return "\n".join(lines)

    @property
    def duration(self) -> int:
        return sum(s.duration for s in self.steps)


@dataclass
class Corpus:
    scenes: dict[str, list[TaskPackage]] = field(default_factory=dict)
    difficulty: dict[tuple[str, str], str] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    def packages(self, scene: str | None = None) -> list[TaskPackage]:
        if scene is not None:
            return list(self.scenes.get(scene, []))
        return [p for s in sorted(self.scenes) for p in self.scenes[s]]

    def by_difficulty(self, scene: str, level: str) -> list[TaskPackage]:
        return [p for p in self.scenes.get(scene, []) if self.difficulty.get((scene, p.package_id)) == level]

    def __len__(self) -> int:
        return sum(len(v) for v in self.scenes.values())


class _Scanner:
    def __init__(self, text: str, base: int = 0):
        self.text = text
        self.pos = 0
        self.base = base

    def offset(self) -> int:
        return self.base + len(self.text[: self.pos].encode("utf-8"))

    def fail(self, message: str):
        raise ParseError(message, self.offset())

    def literal(self, lit: str):
        if not self.text.startswith(lit, self.pos):
            self.fail(f"expected {lit!r}")
        self.pos += len(lit)

    def peek(self, lit: str) -> bool:
        return self.text.startswith(lit, self.pos)

    def match(self, pattern: re.Pattern, what: str) -> re.Match:
        m = pattern.match(self.text, self.pos)
        if not m:
            self.fail(f"expected {what}")
        self.pos = m.end()
        return m

    def at_end(self) -> bool:
        return self.pos == len(self.text)


def _scan_call(sc: _Scanner) -> Call:
    start = sc.offset()
    name = sc.match(_IDENT, "skill name").group(0)
    spec = SKILLS.get(name)
    if spec is None:
        raise UnknownSkillError(name, start)
    sc.literal("(")
    source = None
    if sc.peek("source="):
        sc.literal('source="')
        source = sc.match(_IDENT, "object name").group(0)
        sc.literal('", ')
    sc.literal('target="')
    target = sc.match(_IDENT, "object name").group(0)
    sc.literal('")')
    if spec.has_source and source is None:
        raise ParseError(f"skill {name!r} requires a source argument", start)
    if not spec.has_source and source is not None:
        raise ParseError(f"skill {name!r} takes only a target argument", start)
    return Call(spec, source, target)


def parse_call(text: str, offset: int = 0) -> Call:
    """Parse a bare skill invocation such as ``flap_open(target="refrigerator")``."""
    sc = _Scanner(text, offset)
    call = _scan_call(sc)
    if not sc.at_end():
        sc.fail("trailing text after skill call")
    return call


def parse_step(line: str, offset: int = 0) -> PackageStep:
    sc = _Scanner(line, offset)
    step_id = sc.match(_STEP_ID, "step id like A1").group(0)
    sc.literal(": ")
    call = _scan_call(sc)
    sc.literal("(")
    arm_off = sc.offset()
    if sc.peek("Single"):
        sc.literal("Single")
        arms = 1
    elif sc.peek("Dual"):
        sc.literal("Dual")
        arms = 2
    else:
        sc.fail("expected 'Single' or 'Dual'")
    sc.literal(" arm, ")
    dur_off = sc.offset()
    duration = int(sc.match(_INT, "integer duration").group(0))
    sc.literal(" seconds)")
    if not sc.at_end():
        sc.fail("trailing text after step")
    if duration <= 0:
        raise ParseError("duration must be positive", dur_off)
    if call.skill.category is not Category.WAIT and arms != call.skill.default_arms:
        need = "Dual" if call.skill.default_arms == 2 else "Single"
        raise ParseError(f"skill {call.skill.name!r} is a {need} arm skill", arm_off)
    return PackageStep(step_id, call.skill.name, call.source, call.target, arms, duration)


@dataclass
class _Block:
    scene: str
    header: str
    header_offset: int
    lines: list[tuple[str, int]]


def _lines_with_offsets(text: str) -> Iterable[tuple[str, int]]:
    off = 0
    for raw in text.splitlines(keepends=True):
        yield raw.rstrip("\r\n"), off
        off += len(raw.encode("utf-8"))


def _split_blocks(text: str) -> list[_Block]:
    blocks: list[_Block] = []
    scene = ""
    for raw, off in _lines_with_offsets(text):
        line = raw.strip()
        lead = off + len(raw[: len(raw) - len(raw.lstrip())].encode("utf-8"))
        if not line or line.startswith("#"):
            continue
        if line.startswith("Package "):
            blocks.append(_Block(scene, line, lead, []))
            continue
        m = _SCENE.fullmatch(line)
        if m and "(" not in line:
            scene = m.group(1)
            continue
        if not blocks:
            raise ParseError(f"unexpected line before any package header: {line[:40]!r}", lead)
        # anything else inside a block is a step line; parse_step reports the defect
        blocks[-1].lines.append((line, lead))
    return blocks


def _parse_block(block: _Block) -> TaskPackage:
    m = _HEADER.fullmatch(block.header)
    if not m:
        raise ParseError("malformed package header", block.header_offset)
    letter, title = m.group(1), m.group(2).strip()
    if len(letter) != 1 or not letter.isupper():
        raise ParseError(f"package letter must be a single A-Z letter, got {letter!r}", block.header_offset)
    if not block.lines:
        raise ParseError(f"package {letter} has no steps", block.header_offset)
    steps = []
    for k, (line, off) in enumerate(block.lines, start=1):
        step = parse_step(line, off)
        if step.step_id != f"{letter}{k}":
            raise ParseError(f"expected step id {letter}{k}, got {step.step_id}", off)
        steps.append(step)
    return TaskPackage(letter, title, tuple(steps), block.scene)


def parse_package_text(text: str) -> list[TaskPackage]:
    pkgs: list[TaskPackage] = []
    seen: set[tuple[str, str]] = set()
    for block in _split_blocks(text):
        pkg = _parse_block(block)
        key = (pkg.scene, pkg.package_id)
        if key in seen:
            raise ParseError(f"duplicate package letter {pkg.package_id}", block.header_offset)
        seen.add(key)
        pkgs.append(pkg)
    return pkgs


def serialize_packages(pkgs: Iterable[TaskPackage]) -> str:
    return "\n\n".join(p.to_text() for p in pkgs) + "\n"


def normalize_text(text: str) -> str:
    """Whitespace-normalized form used for round-trip comparisons."""
    lines = [ln.strip() for ln in text.splitlines()]
    return "\n".join(ln for ln in lines if ln and not ln.startswith("#"))


def sequential_duration(pkgs: Iterable[TaskPackage]) -> int:
    return sum(p.duration for p in pkgs)


def _load_file(path: Path, scene: str) -> tuple[list[TaskPackage], str, list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return [], "", [f"{path}: unreadable: {exc}"]
    first = text.splitlines()[0] if text.strip() else ""
    m = _DIFFICULTY.fullmatch(first.strip())
    difficulty = m.group(1) if m else ""
    errors = []
    if difficulty and difficulty not in DIFFICULTIES:
        errors.append(f"{path}: unknown difficulty {difficulty!r}")
        difficulty = ""
    try:
        blocks = _split_blocks(text)
    except ParseError as exc:
        return [], difficulty, [f"{path}: {exc}"]
    pkgs = []
    for block in blocks:
        try:
            pkg = _parse_block(block)
        except ParseError as exc:
            errors.append(f"{path}: {exc}")
            continue
        if not pkg.scene:
            pkg = TaskPackage(pkg.package_id, pkg.title, pkg.steps, scene)
        pkgs.append(pkg)
    return pkgs, difficulty, errors


def load_corpus(root: str | Path) -> Corpus:
    """Load ``root/<scene>/*.txt``. Bad files or packages are reported in ``errors``
    and skipped; everything else still loads."""
    root = Path(root)
    corpus = Corpus()
    if not root.is_dir():
        corpus.errors.append(f"{root}: corpus directory not found")
        return corpus
    jobs = [(d.name, f) for d in sorted(root.iterdir()) if d.is_dir() for f in sorted(d.glob("*.txt"))]
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda job: _load_file(job[1], job[0]), jobs))
    for (scene, path), (pkgs, difficulty, errors) in zip(jobs, results):
        corpus.errors.extend(errors)
        bucket = corpus.scenes.setdefault(scene, [])
        for pkg in pkgs:
            if any(p.package_id == pkg.package_id for p in bucket):
                corpus.errors.append(f"{path}: duplicate package {pkg.package_id} in scene {scene}")
                continue
            bucket.append(pkg)
            corpus.difficulty[(scene, pkg.package_id)] = difficulty or "easy"
    for scene in corpus.scenes:
        corpus.scenes[scene].sort(key=lambda p: p.package_id)
    for err in corpus.errors:
        log.warning(err)
    return corpus


def bundled_corpus_path() -> Path:
    return Path(__file__).parent / "data" / "corpus"
