"""Lexical package retrieval: token overlap between an instruction and package text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..packages import Corpus, TaskPackage

STOPWORDS = frozenset(
    "make prepare please me and the for a an of to in on with my some i you it into from up get".split()
)


def _singular(tok: str) -> str:
    if len(tok) > 4 and tok.endswith("ies"):
        return tok[:-3] + "y"
    if len(tok) > 3 and tok.endswith("es") and tok[-3] in "sxz":
        return tok[:-2]
    if len(tok) > 3 and tok.endswith("s") and not tok.endswith("ss"):
        return tok[:-1]
    return tok


def tokens(text: str) -> set[str]:
    """Lowercased content words; underscores split, plurals folded, stopwords dropped."""
    out = set()
    for raw in re.split(r"[^a-z0-9]+", text.lower()):
        if raw and raw not in STOPWORDS:
            out.add(_singular(raw))
    return out


def package_tokens(pkg: TaskPackage) -> set[str]:
    words = tokens(pkg.title)
    for st in pkg.steps:
        for obj in (st.source, st.target):
            if obj:
                words |= tokens(obj)
    return words


@dataclass
class Retrieval:
    scene: str | None
    packages: list[TaskPackage]
    scores: dict[str, int]

    @property
    def message(self) -> str:
        if not self.packages:
            return "no package found"
        return f"{self.scene}: " + ", ".join(f"Package {p.package_id}" for p in self.packages)


def retrieve(instruction: str, corpus: Corpus) -> Retrieval:
    """Best-scoring scene, then its packages sharing at least one content token."""
    want = tokens(instruction)
    best: tuple[int, str] | None = None
    per_scene: dict[str, list[tuple[TaskPackage, int]]] = {}
    for scene in sorted(corpus.scenes):
        hits = [(p, len(want & package_tokens(p))) for p in corpus.scenes[scene]]
        hits = [(p, s) for p, s in hits if s >= 1]
        per_scene[scene] = hits
        total = sum(s for _, s in hits)
        if total and (best is None or total > best[0]):
            best = (total, scene)
    if best is None:
        return Retrieval(None, [], {})
    scene = best[1]
    hits = per_scene[scene]
    return Retrieval(scene, [p for p, _ in hits], {p.package_id: s for p, s in hits})


def retrieve_packages(instruction: str, corpus: Corpus) -> list[TaskPackage]:
    return retrieve(instruction, corpus).packages
