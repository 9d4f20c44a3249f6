"""Feature extraction for functional-unit classification.

Sparse families are binary indicators with readable names ("U=okay",
"B=do|you", "PREV=PropQ", "POS@0=VB"); a vocabulary maps names to dense
integer ids. Word embeddings contribute a separate fixed-length dense
block holding the arithmetic mean of the vectors of known tokens.

Syntactic families (POS, dependency relations) read token annotations
carried in CoNLL-U sidecar files keyed by utterance id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .dialogues import (ROOT, DataFormatError, TokenAnnotation, UnifiedDialogue,
                        UsageError, Utterance, iter_utterances)

NO_PREV = "NONE"  # previous-tag placeholder at dialogue start

# Canonical order used when the previous utterance carries several tags.
_DIMENSION_RANK = {"TASK": 0, "SOM": 1, "FEEDBACK": 2}

_FAMILIES = ("unigrams", "bigrams", "trigrams", "prev_da",
             "pos", "ipos", "dep", "idep")


@dataclass(frozen=True)
class FeatureConfig:
    use_unigrams: bool = True
    use_bigrams: bool = False
    use_trigrams: bool = False
    use_prev_da: bool = False
    use_pos: bool = False
    use_ipos: bool = False
    use_dep: bool = False
    use_idep: bool = False
    use_embeddings: bool = False
    embedding_dim: int = 0

    def __post_init__(self):
        if not any(self.enabled(f) for f in _FAMILIES) and not self.use_embeddings:
            raise UsageError("feature configuration enables no feature family")
        if self.use_embeddings and self.embedding_dim <= 0:
            raise UsageError("embeddings enabled but embedding_dim not set")

    def enabled(self, family: str) -> bool:
        return getattr(self, f"use_{family}")

    @property
    def needs_syntax(self) -> bool:
        return self.use_pos or self.use_ipos or self.use_dep or self.use_idep

    def to_json(self) -> dict:
        return {f"use_{f}": self.enabled(f) for f in _FAMILIES} | {
            "use_embeddings": self.use_embeddings,
            "embedding_dim": self.embedding_dim}

    @staticmethod
    def from_json(d: dict) -> "FeatureConfig":
        return FeatureConfig(**d)


@dataclass
class FeatureVector:
    sparse: list[tuple[int, float]]  # (id, value), ids strictly increasing
    dense: Optional[np.ndarray] = None


class Vocabulary:
    """Injective feature-name to id map; frozen copies never grow."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self.frozen = False

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def id_of(self, name: str) -> Optional[int]:
        i = self._ids.get(name)
        if i is None and not self.frozen:
            i = len(self._ids)
            self._ids[name] = i
        return i

    def freeze(self) -> "Vocabulary":
        self.frozen = True
        return self

    def names(self) -> list[str]:
        return list(self._ids)

    def save(self, path: Path | str):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for name, i in self._ids.items():
                f.write(f"{name}\t{i}\n")

    @staticmethod
    def load(path: Path | str) -> "Vocabulary":
        v = Vocabulary()
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                name, _, i = line.rpartition("\t")
                if not name or not i.isdigit():
                    raise DataFormatError(f"{path}:{lineno}: bad vocabulary line")
                if int(i) != len(v._ids):
                    raise DataFormatError(
                        f"{path}:{lineno}: ids must be consecutive from 0")
                v._ids[name] = int(i)
        return v.freeze()


class EmbeddingTable:
    def __init__(self, dim: int):
        self.dim = dim
        self.vectors: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return self.lookup(token) is not None

    def lookup(self, token: str) -> Optional[np.ndarray]:
        v = self.vectors.get(token)
        if v is None:
            v = self.vectors.get(token.lower())
        return v


def load_embeddings(path: Path | str, expected_dim: int) -> EmbeddingTable:
    table = EmbeddingTable(expected_dim)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != expected_dim + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {expected_dim} values, "
                    f"got {len(parts) - 1}")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as e:
                raise DataFormatError(f"{path}:{lineno}: {e}") from e
            table.vectors[parts[0]] = vec
    return table


def load_conllu(path: Path | str) -> dict[str, list[TokenAnnotation]]:
    """Reads sentence blocks keyed by their ``# utterance_id = ...`` comment.

    Head column is converted from the 1-based file convention (0 = root)
    to 0-based indices with the ROOT sentinel.
    """
    out: dict[str, list[TokenAnnotation]] = {}
    current_id: Optional[str] = None
    rows: list[tuple[str, str, str, int]] = []

    def flush(lineno: int):
        nonlocal current_id, rows
        if not rows:
            current_id = None
            return
        if current_id is None:
            raise DataFormatError(
                f"{path}:{lineno}: sentence block without an utterance_id "
                "comment")
        anns = []
        n = len(rows)
        for i, (form, pos, rel, head) in enumerate(rows):
            if head != ROOT and not (0 <= head < n):
                raise DataFormatError(
                    f"{path}: {current_id}: token {i} head {head} out of range")
            anns.append(TokenAnnotation(index=i, form=form, pos=pos,
                                        dep_relation=rel, head=head))
        if current_id in out:
            raise DataFormatError(f"{path}: duplicate utterance_id {current_id}")
        out[current_id] = anns
        current_id, rows = None, []

    with open(path, encoding="utf-8") as f:
        lineno = 0
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                if key.strip() in ("utterance_id", "sent_id"):
                    current_id = value.strip()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 10 columns, got {len(cols)}")
            if "-" in cols[0] or "." in cols[0]:
                continue  # multiword ranges and empty nodes carry no features
            try:
                head = int(cols[6])
            except ValueError as e:
                raise DataFormatError(f"{path}:{lineno}: bad head {cols[6]!r}") from e
            rows.append((cols[1], cols[3], cols[7], ROOT if head == 0 else head - 1))
        flush(lineno + 1)
    return out


@dataclass
class AlignmentReport:
    attached: int = 0
    missing: list[str] = field(default_factory=list)
    mismatched: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.attached + len(self.missing) + len(self.mismatched)


def attach_annotations(dialogues: list[UnifiedDialogue],
                       annotations: dict[str, list[TokenAnnotation]]) -> AlignmentReport:
    """Stores annotations on utterances whose whitespace tokens they match.

    A mismatched utterance keeps tokens unset, which disables syntactic
    families for it downstream instead of failing the whole run.
    """
    report = AlignmentReport()
    for _d, u in iter_utterances(dialogues):
        if u.normalized_text is None:
            raise UsageError(f"{u.utterance_id}: normalize before annotating")
        anns = annotations.get(u.utterance_id)
        if anns is None:
            report.missing.append(u.utterance_id)
            continue
        if [a.form for a in anns] != u.normalized_text.split():
            report.mismatched.append(u.utterance_id)
            continue
        u.tokens = anns
        report.attached += 1
    return report


def gold_prev_tag(u: Utterance) -> Optional[str]:
    """Node of the first mapped tag in TASK, SOM, FEEDBACK order."""
    if not u.mapped_tags:
        return None
    best = min(enumerate(u.mapped_tags),
               key=lambda p: (_DIMENSION_RANK[p[1].dimension], p[0]))
    return best[1].node


def _sparse_names(u: Utterance, prev_tag: Optional[str], family: str,
                  strict: bool) -> list[str]:
    if family in ("unigrams", "bigrams", "trigrams"):
        if u.normalized_text is None:
            raise UsageError(f"{u.utterance_id}: normalized text missing")
        toks = u.normalized_text.split()
        if family == "unigrams":
            return [f"U={t}" for t in toks]
        padded = ["<s>"] + toks + ["</s>"]
        if family == "bigrams":
            return [f"B={a}|{b}" for a, b in zip(padded, padded[1:])]
        return [f"T={a}|{b}|{c}"
                for a, b, c in zip(padded, padded[1:], padded[2:])]
    if family == "prev_da":
        return [f"PREV={prev_tag if prev_tag is not None else NO_PREV}"]
    # syntactic families below
    if u.tokens is None:
        if strict:
            raise UsageError(
                f"{u.utterance_id}: syntactic features requested but no "
                "token annotations are attached")
        return []
    if family == "pos":
        return [f"POS={t.pos}" for t in u.tokens]
    if family == "ipos":
        return [f"POS@{t.index}={t.pos}" for t in u.tokens]
    if family == "dep":
        return [f"DEP={t.dep_relation}" for t in u.tokens]
    return [f"DEP@{t.index}={t.dep_relation}" for t in u.tokens]


def extract(u: Utterance, prev_tag: Optional[str], cfg: FeatureConfig,
            vocab: Vocabulary, emb: Optional[EmbeddingTable] = None,
            strict: bool = True) -> FeatureVector:
    ids = set()
    for family in _FAMILIES:
        if not cfg.enabled(family):
            continue
        for name in _sparse_names(u, prev_tag, family, strict):
            i = vocab.id_of(name)
            if i is not None:
                ids.add(i)
    dense = None
    if cfg.use_embeddings:
        if emb is None:
            raise UsageError("embeddings enabled but no table supplied")
        if emb.dim != cfg.embedding_dim:
            raise UsageError(
                f"embedding table dimension {emb.dim} does not match "
                f"configured {cfg.embedding_dim}")
        if u.normalized_text is None:
            raise UsageError(f"{u.utterance_id}: normalized text missing")
        vecs = [v for t in u.normalized_text.split()
                if (v := emb.lookup(t)) is not None]
        if vecs:
            dense = np.array(vecs, dtype=np.float64).mean(axis=0)
        else:
            dense = np.zeros(cfg.embedding_dim, dtype=np.float64)
    return FeatureVector(sparse=[(i, 1.0) for i in sorted(ids)], dense=dense)


def build_vocabulary(dialogues: list[UnifiedDialogue], cfg: FeatureConfig,
                     strict: bool = False, prev_labeler=gold_prev_tag) -> Vocabulary:
    """Collects feature names family by family in a fixed order.

    Grouping by family keeps ids of one family in one contiguous block,
    so vocabularies built from the same data agree on shared families.
    ``prev_labeler`` supplies the tag a following utterance would see as
    its previous-tag feature.
    """
    vocab = Vocabulary()
    for family in _FAMILIES:
        if not cfg.enabled(family):
            continue
        if family == "prev_da":
            vocab.id_of(f"PREV={NO_PREV}")
            for d in dialogues:
                for u in d.utterances:
                    tag = prev_labeler(u)
                    if tag is not None:
                        vocab.id_of(f"PREV={tag}")
            continue
        for d in dialogues:
            for u in d.utterances:
                for name in _sparse_names(u, None, family, strict):
                    vocab.id_of(name)
    return vocab.freeze()
