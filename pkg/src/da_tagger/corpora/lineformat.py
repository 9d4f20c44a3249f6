"""Readers for the two line-oriented evaluation sets.

CAPC files hold isolated computer-directed turns, one per line as
``label<TAB>text``; every line becomes its own single-utterance dialogue
since the turns share no context.

S-Logs files hold chatbot sessions as blank-line-separated blocks of
``speaker<TAB>label<TAB>text`` lines, speaker S for the system and U for
the user. System turns are kept: they carry the gold context the user
turns are evaluated in.
"""

from __future__ import annotations

from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

CAPC_SCHEME = "capc-gold"
SLOGS_SCHEME = "slogs-gold"


def read_capc(files: list[Path]) -> list[UnifiedDialogue]:
    dialogues = []
    for path in files:
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataFormatError(
                        f"{path}:{lineno}: expected label<TAB>text, "
                        f"got {len(parts)} fields")
                label, text = parts
                did = f"{path.stem}-{lineno}"
                dialogues.append(UnifiedDialogue(
                    dialogue_id=did, corpus="CAPC",
                    utterances=[Utterance(
                        utterance_id=f"{did}-0", speaker="U", position=0,
                        raw_text=text, source_tags=[(CAPC_SCHEME, label)])]))
    return dialogues


def read_slogs(files: list[Path]) -> list[UnifiedDialogue]:
    dialogues = []
    for path in files:
        blocks: list[list[tuple[int, str]]] = [[]]
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    if blocks[-1]:
                        blocks.append([])
                    continue
                if line.lstrip().startswith("#"):
                    continue
                blocks[-1].append((lineno, line))
        for blockno, block in enumerate(b for b in blocks if b):
            did = f"{path.stem}-{blockno}"
            dialogue = UnifiedDialogue(dialogue_id=did, corpus="SLOGS")
            for lineno, line in block:
                parts = line.split("\t")
                if len(parts) != 3:
                    raise DataFormatError(
                        f"{path}:{lineno}: expected speaker<TAB>label<TAB>"
                        f"text, got {len(parts)} fields")
                speaker, label, text = parts
                if speaker not in ("S", "U"):
                    raise DataFormatError(
                        f"{path}:{lineno}: speaker must be S or U, "
                        f"got {speaker!r}")
                dialogue.utterances.append(Utterance(
                    utterance_id=f"{did}-{len(dialogue.utterances)}",
                    speaker=speaker, position=len(dialogue.utterances),
                    raw_text=text, source_tags=[(SLOGS_SCHEME, label)]))
            dialogues.append(dialogue)
    return dialogues
