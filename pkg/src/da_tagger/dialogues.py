"""Corpus-neutral dialogue records and their line-delimited JSON form.

Every corpus reader produces ``UnifiedDialogue`` objects; every downstream
stage (normalization, schema mapping, feature extraction) consumes and
re-emits them. One dialogue is serialized per line, UTF-8, with the exact
field names used below, so files written by one stage are readable by any
other tool.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional

CORPORA = ("SWDA", "AMI", "MAPTASK", "VERBMOBIL", "OASIS",
           "DIALOGBANK", "CAPC", "SLOGS", "CUSTOM")

ROOT = -1  # head sentinel for the syntactic root token


class DataFormatError(Exception):
    """Malformed record in a corpus or unified file (carries a locator)."""


class IntegrityError(Exception):
    """Declared expected counts do not match what was read."""


class UsageError(Exception):
    """A pipeline stage was invoked out of order or with bad arguments."""


@dataclass(frozen=True)
class DATag:
    """A mapped dialogue-act tag: taxonomy node plus its semantic dimension."""
    dimension: str  # TASK | SOM | FEEDBACK
    node: str

    def as_list(self) -> list:
        return [self.dimension, self.node]


@dataclass(frozen=True)
class TokenAnnotation:
    index: int
    form: str
    pos: str
    dep_relation: str
    head: int  # ROOT or 0-based index of the head token

    def __post_init__(self):
        if self.head == self.index:
            raise DataFormatError(
                f"token {self.index} ({self.form!r}) is its own head")


@dataclass
class Utterance:
    utterance_id: str
    speaker: str
    position: int
    raw_text: str
    source_tags: list[tuple[str, str]] = field(default_factory=list)
    normalized_text: Optional[str] = None
    tokens: Optional[list[TokenAnnotation]] = None
    mapped_tags: Optional[list[DATag]] = None

    def to_json(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "speaker": self.speaker,
            "position": self.position,
            "raw_text": self.raw_text,
            "source_tags": [list(t) for t in self.source_tags],
            "normalized_text": self.normalized_text,
            "tokens": None if self.tokens is None else [
                {"index": t.index, "form": t.form, "pos": t.pos,
                 "dep_relation": t.dep_relation,
                 "head": None if t.head == ROOT else t.head}
                for t in self.tokens],
            "mapped_tags": None if self.mapped_tags is None else [
                t.as_list() for t in self.mapped_tags],
        }

    @staticmethod
    def from_json(d: dict) -> "Utterance":
        tokens = None
        if d.get("tokens") is not None:
            tokens = [TokenAnnotation(
                index=t["index"], form=t["form"], pos=t["pos"],
                dep_relation=t["dep_relation"],
                head=ROOT if t["head"] is None else t["head"])
                for t in d["tokens"]]
        mapped = None
        if d.get("mapped_tags") is not None:
            mapped = [DATag(dimension=m[0], node=m[1]) for m in d["mapped_tags"]]
        return Utterance(
            utterance_id=d["utterance_id"], speaker=d["speaker"],
            position=d["position"], raw_text=d["raw_text"],
            source_tags=[(s[0], s[1]) for s in d["source_tags"]],
            normalized_text=d.get("normalized_text"),
            tokens=tokens, mapped_tags=mapped)


@dataclass
class UnifiedDialogue:
    dialogue_id: str
    corpus: str
    utterances: list[Utterance] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.corpus not in CORPORA:
            raise ValueError(f"unknown corpus {self.corpus!r}")

    def check_positions(self):
        for i, u in enumerate(self.utterances):
            if u.position != i:
                raise IntegrityError(
                    f"{self.dialogue_id}: utterance {u.utterance_id} at slot "
                    f"{i} carries position {u.position}")

    def to_json(self) -> dict:
        return {
            "dialogue_id": self.dialogue_id,
            "corpus": self.corpus,
            "metadata": dict(self.metadata),
            "utterances": [u.to_json() for u in self.utterances],
        }

    @staticmethod
    def from_json(d: dict) -> "UnifiedDialogue":
        return UnifiedDialogue(
            dialogue_id=d["dialogue_id"], corpus=d["corpus"],
            utterances=[Utterance.from_json(u) for u in d["utterances"]],
            metadata=dict(d.get("metadata", {})))


@dataclass
class CorpusManifest:
    corpus: str
    file_globs: list[str]
    expected_dialogues: Optional[int] = None
    expected_utterances: Optional[int] = None

    @staticmethod
    def load(path: Path | str) -> "CorpusManifest":
        with open(path, encoding="utf-8") as f:
            d = json.load(f)
        return CorpusManifest(
            corpus=d["corpus"], file_globs=list(d["file_globs"]),
            expected_dialogues=d.get("expected_dialogues"),
            expected_utterances=d.get("expected_utterances"))

    def save(self, path: Path | str):
        d = {"corpus": self.corpus, "file_globs": self.file_globs}
        if self.expected_dialogues is not None:
            d["expected_dialogues"] = self.expected_dialogues
        if self.expected_utterances is not None:
            d["expected_utterances"] = self.expected_utterances
        Path(path).write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")

    def verify(self, dialogues: list[UnifiedDialogue]):
        n_d = len(dialogues)
        n_u = sum(len(d.utterances) for d in dialogues)
        if self.expected_dialogues is not None and n_d != self.expected_dialogues:
            raise IntegrityError(
                f"{self.corpus}: expected {self.expected_dialogues} dialogues, "
                f"found {n_d}")
        if self.expected_utterances is not None and n_u != self.expected_utterances:
            raise IntegrityError(
                f"{self.corpus}: expected {self.expected_utterances} utterances, "
                f"found {n_u}")


def write_dialogues(dialogues: Iterable[UnifiedDialogue], path: Path | str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for d in dialogues:
            f.write(json.dumps(d.to_json(), ensure_ascii=False,
                               separators=(",", ":")) + "\n")


def read_dialogues(path: Path | str) -> list[UnifiedDialogue]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(UnifiedDialogue.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as e:
                raise DataFormatError(f"{path}:{lineno}: {e}") from e
    return out


def iter_utterances(dialogues: Iterable[UnifiedDialogue]) -> Iterator[tuple[UnifiedDialogue, Utterance]]:
    for d in dialogues:
        for u in d.utterances:
            yield d, u


def reindex(dialogue: UnifiedDialogue) -> UnifiedDialogue:
    """Renumber utterance positions 0..n-1 after removals."""
    for i, u in enumerate(dialogue.utterances):
        u.position = i
    return dialogue
