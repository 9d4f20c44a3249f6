"""VerbMobil dialogue-act transcript reader.

Targets the flat DA-annotated transcript export: one utterance per line,
three tab-separated fields (speaker, DA tag, text), ``#`` comment lines
and blank lines ignored, one file per dialogue. Released VerbMobil
variants differ; this is the simplest export documented for the English
DA annotations, and conversion from other variants is a one-line awk job.
Tags like REQUEST_SUGGEST or FEEDBACK_POSITIVE are kept whole; the rule
table matches their families by prefix.
"""

from __future__ import annotations

from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "verbmobil-da"


def read_file(path: Path) -> UnifiedDialogue:
    did = path.stem
    dialogue = UnifiedDialogue(dialogue_id=did, corpus="VERBMOBIL")
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataFormatError(
                    f"{path}:{lineno}: expected speaker, tag, text "
                    f"(3 tab-separated fields), got {len(parts)}")
            speaker, tag, text = parts
            dialogue.utterances.append(Utterance(
                utterance_id=f"{did}-{lineno}", speaker=speaker,
                position=len(dialogue.utterances), raw_text=text,
                source_tags=[(SCHEME, tag)]))
    return dialogue


def read(files: list[Path]) -> list[UnifiedDialogue]:
    return [read_file(p) for p in files]
