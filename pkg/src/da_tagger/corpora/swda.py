"""Switchboard DA release reader (.utt files).

A file starts with a header block closed by a ``====`` separator line,
followed by one slash unit per line::

    sd      A.1 utt1: Okay, so.  /

Long units wrap onto indented continuation lines. Units tagged ``+``
continue an earlier unit by the same caller and are merged back into it,
so the emitted functional units match the WS97 segmentation.
"""

from __future__ import annotations

import re
from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "swda-damsl"

_SEPARATOR = re.compile(r"^=+\s*$")
_UNIT = re.compile(r"^(\S+)\s+([A-Za-z@]+)\.(\d+)\s+utt(\d+):\s*(.*)$")


def conversation_alias(stem: str) -> str:
    """'sw_0005_2005' and 'sw2005' both name conversation 2005."""
    m = re.match(r"sw_\d+_(\d+)$", stem)
    return f"sw{m.group(1)}" if m else stem


def read_file(path: Path, merge_continuations: bool = True) -> UnifiedDialogue:
    did = path.stem.replace(".utt", "")
    dialogue = UnifiedDialogue(dialogue_id=did, corpus="SWDA")
    utts: list[Utterance] = []
    body = False  # header lines are skipped until a separator or first unit
    with open(path, encoding="utf-8", errors="replace") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if _SEPARATOR.match(line):
                body = True
                continue
            if not line.strip():
                continue
            m = _UNIT.match(line)
            if m:
                body = True
                tag, caller, turn, uttno, text = m.groups()
                if merge_continuations and tag == "+" and utts:
                    host = next((u for u in reversed(utts)
                                 if u.speaker == caller), utts[-1])
                    host.raw_text = f"{host.raw_text} {text}".strip()
                    continue
                utts.append(Utterance(
                    utterance_id=f"{did}-{caller}.{turn}.{uttno}",
                    speaker=caller, position=len(utts), raw_text=text,
                    source_tags=[(SCHEME, tag)]))
                continue
            if body:
                if line[0].isspace() and utts:
                    # wrapped continuation of the previous unit's text
                    utts[-1].raw_text = f"{utts[-1].raw_text} {line.strip()}"
                    continue
                raise DataFormatError(f"{path}:{lineno}: unrecognized line")
    for i, u in enumerate(utts):
        u.position = i
    dialogue.utterances = utts
    return dialogue


def read(files: list[Path], merge_continuations: bool = True) -> list[UnifiedDialogue]:
    return [read_file(p, merge_continuations) for p in files]
