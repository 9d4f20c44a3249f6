"""Surface-text normalization and Switchboard tag collapsing.

Normalization reduces every corpus to the shared surface form of the test
data: lowercase (standalone "I" excepted), punctuation gone except
apostrophes inside contractions, transcription markup deleted. The same
function is applied at train and tag time, so it must be idempotent and its
output alphabet fixed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .dialogues import UnifiedDialogue, UsageError, reindex

_DOUBLE_ANGLE = re.compile(r"<<[^<>]*>>")
_ANGLE = re.compile(r"<[^<>]*>")
_BRACE_MARK = re.compile(r"\{[A-Z](?=[\s}])")
_NON_ALPHABET = re.compile(r"[^A-Za-z0-9' ]")
_SPACES = re.compile(r" {2,}")


@dataclass(frozen=True)
class NormalizationConfig:
    lowercase: bool = True
    preserve_I: bool = True
    keep_apostrophes: bool = True
    strip_special: bool = True


DEFAULT_NORMALIZATION = NormalizationConfig()


def normalize(text: str, cfg: NormalizationConfig = DEFAULT_NORMALIZATION) -> str:
    """Normalize one utterance. Total: any string in, possibly empty string out.

    Order matters: markup spans are deleted before the character filter so
    their contents do not leak into the text, and the apostrophe rule runs
    on the filtered string so flanking characters are already final.
    """
    s = text
    if cfg.strip_special:
        # <<comments>> and <events> are deleted with their contents; braces
        # mark filler/edit regions whose contents are real speech, so only
        # the "{X" marker and the closing brace go.
        prev = None
        while prev != s:
            prev = s
            s = _DOUBLE_ANGLE.sub(" ", s)
            s = _ANGLE.sub(" ", s)
        s = _BRACE_MARK.sub(" ", s)
    s = _NON_ALPHABET.sub(" ", s)
    if cfg.keep_apostrophes:
        chars = []
        for i, ch in enumerate(s):
            if ch == "'":
                if 0 < i < len(s) - 1 and s[i - 1].isalpha() and s[i + 1].isalpha():
                    chars.append(ch)
            else:
                chars.append(ch)
        s = "".join(chars)
    else:
        s = s.replace("'", "")
    tokens = s.split()
    if cfg.lowercase:
        tokens = [t if (t == "I" and cfg.preserve_I) else t.lower()
                  for t in tokens]
    return " ".join(tokens)


def normalize_corpus(dialogues: list[UnifiedDialogue],
                     cfg: NormalizationConfig = DEFAULT_NORMALIZATION) -> list[UnifiedDialogue]:
    for d in dialogues:
        for u in d.utterances:
            u.normalized_text = normalize(u.raw_text, cfg)
    return dialogues


def drop_empty(dialogues: list[UnifiedDialogue]) -> tuple[list[UnifiedDialogue], int]:
    """Remove utterances whose normalized text is empty; re-index positions."""
    dropped = 0
    for d in dialogues:
        kept = []
        for u in d.utterances:
            if u.normalized_text is None:
                raise UsageError(
                    f"{d.dialogue_id}/{u.utterance_id}: normalize before drop_empty")
            if u.normalized_text:
                kept.append(u)
            else:
                dropped += 1
        d.utterances = kept
        reindex(d)
    return dialogues, dropped


class UnknownTagError(Exception):
    """A Switchboard tag that the collapse table does not cover."""


_COLLAPSE_TABLE: dict[str, str] | None = None
_CANONICAL_42: frozenset[str] | None = None

# Tags whose carat suffix is part of the class identity, never stripped.
_CARAT_CLASSES = ("qy^d", "qw^d", "b^m")

_SEGMENT_SPLIT = re.compile(r"\s*[,;]\s*")
_CARAT_SUFFIX = re.compile(r"(.)\^.*")
_DECORATION = re.compile(r"[()@*]")


def _load_tables():
    global _COLLAPSE_TABLE, _CANONICAL_42
    if _COLLAPSE_TABLE is not None:
        return
    table = {}
    data = resources.files("da_tagger.data")
    for line in (data / "ws97_collapse.tsv").read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        raw, collapsed = line.split("\t")
        table[raw] = collapsed
    _COLLAPSE_TABLE = table
    _CANONICAL_42 = frozenset(
        t for t in (data / "ws97_tags.txt").read_text(encoding="utf-8").split()
        if t)


def canonical_tags() -> frozenset[str]:
    """The 42 collapsed Switchboard tags."""
    _load_tables()
    return _CANONICAL_42


def collapse_swda_tag(raw_tag: str) -> str:
    """Collapse a raw Switchboard DAMSL tag to its 42-tag class.

    Continuation segments ("+") must be merged with their antecedent before
    this point; they have no class of their own.
    """
    _load_tables()
    tag = raw_tag.strip()
    if not tag:
        raise UnknownTagError("empty tag")
    if tag in _COLLAPSE_TABLE:
        return _COLLAPSE_TABLE[tag]
    tag = _SEGMENT_SPLIT.split(tag)[0]
    if tag in _COLLAPSE_TABLE:
        return _COLLAPSE_TABLE[tag]
    for cls in _CARAT_CLASSES:
        if tag == cls or tag.startswith(cls + "^") or tag.startswith(cls + "("):
            return cls
    tag = _CARAT_SUFFIX.sub(r"\1", tag)
    tag = _DECORATION.sub("", tag)
    if tag in _COLLAPSE_TABLE:
        return _COLLAPSE_TABLE[tag]
    if tag in _CANONICAL_42:
        return tag
    raise UnknownTagError(f"no collapse rule for tag {raw_tag!r}")
