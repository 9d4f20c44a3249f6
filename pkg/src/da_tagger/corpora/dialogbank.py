"""DialogBank reader: multi-column ISO annotation tables.

One tab-separated file per dialogue. The header row names the columns;
besides the segment id, sender, and text columns every recognized
dimension column contributes tags of the form ``<dimension>:<function>``
(e.g. ``task:inform``, ``autoFeedback:autoPositive``). Cells may prefix a
markable id (``da3:inform``) and append qualifiers in brackets; both are
carried through verbatim here and stripped during mapping where needed.
Dimensions outside the modelled three (turn management and friends) still
yield tags, which simply have no mapping rules.
"""

from __future__ import annotations

import re
from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "dialogbank-iso"

# markable ids start with letters and contain a digit ("fs8", "fs8b");
# function names never do, so requiring the digit keeps them safe
_MARKABLE_PREFIX = re.compile(r"^[A-Za-z]+\d+[A-Za-z0-9]*\s*:")

# Header spellings vary across DialogBank exports.
_DIMENSION_COLUMNS = {
    "task": "task",
    "autofeedback": "autoFeedback",
    "auto-feedback": "autoFeedback",
    "allofeedback": "alloFeedback",
    "allo-feedback": "alloFeedback",
    "socialobligationsmanagement": "som",
    "socialobligationmanagement": "som",
    "som": "som",
    "turnmanagement": "turnManagement",
    "timemanagement": "timeManagement",
    "owncommunicationmanagement": "ownCommunicationManagement",
    "partnercommunicationmanagement": "partnerCommunicationManagement",
    "discoursestructuring": "discourseStructuring",
    "contactmanagement": "contactManagement",
}

_ID_COLUMNS = ("markables", "markable", "fs id", "id")
_SENDER_COLUMNS = ("sender", "speaker", "participant")
_TEXT_COLUMNS = ("fs text", "text", "functional segment text")
_IGNORED_COLUMNS = ("turn transcription", "comment", "comments")


def _cell_tags(dimension: str, cell: str) -> list[str]:
    tags = []
    for part in cell.split(";"):
        part = _MARKABLE_PREFIX.sub("", part.strip()).strip()
        if part and part != "-":
            tags.append(f"{dimension}:{part}")
    return tags


def read_file(path: Path) -> UnifiedDialogue:
    did = path.stem
    with open(path, encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f]
    rows = [ln.split("\t") for ln in lines if ln.strip()]
    if not rows:
        return UnifiedDialogue(dialogue_id=did, corpus="DIALOGBANK")
    header = [h.strip() for h in rows[0]]
    lowered = [h.lower() for h in header]

    def find(names) -> int | None:
        for name in names:
            if name in lowered:
                return lowered.index(name)
        return None

    id_col = find(_ID_COLUMNS)
    sender_col = find(_SENDER_COLUMNS)
    text_col = find(_TEXT_COLUMNS)
    if sender_col is None or text_col is None:
        raise DataFormatError(
            f"{path}: header must name sender and segment-text columns, "
            f"got {header}")
    dim_cols = {i: _DIMENSION_COLUMNS[h] for i, h in enumerate(lowered)
                if h in _DIMENSION_COLUMNS}

    dialogue = UnifiedDialogue(dialogue_id=did, corpus="DIALOGBANK")
    for rowno, row in enumerate(rows[1:], 2):
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        tags = []
        for i, dimension in dim_cols.items():
            tags.extend(_cell_tags(dimension, row[i]))
        if not tags:
            raise DataFormatError(
                f"{path}:{rowno}: functional segment carries no dialogue act")
        seg_id = row[id_col].strip() if id_col is not None else f"fs{rowno}"
        dialogue.utterances.append(Utterance(
            utterance_id=f"{did}-{seg_id}", speaker=row[sender_col].strip(),
            position=len(dialogue.utterances), raw_text=row[text_col].strip(),
            source_tags=[(SCHEME, t) for t in tags]))
    return dialogue


def read(files: list[Path]) -> list[UnifiedDialogue]:
    return [read_file(p) for p in files]
