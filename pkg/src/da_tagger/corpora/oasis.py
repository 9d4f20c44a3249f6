"""BT Oasis reader: speech-act annotated call transcripts in XML.

Utterance elements carry the act in an ``sp-act`` attribute; the speaker
comes from the enclosing turn (or the element itself)::

    <turn speaker="a"><utt sp-act="greet">good morning</utt></turn>
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "oasis-spact"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def read_file(path: Path) -> UnifiedDialogue:
    did = path.stem
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as e:
        raise DataFormatError(f"{path}: {e}") from e
    dialogue = UnifiedDialogue(dialogue_id=did, corpus="OASIS")

    def walk(el: ET.Element, speaker: str):
        speaker = el.get("speaker") or el.get("spkr") or speaker
        if _local(el.tag) in ("utt", "unit", "segment"):
            act = el.get("sp-act")
            if act is None:
                raise DataFormatError(
                    f"{path}: element {_local(el.tag)!r} without sp-act")
            text = " ".join("".join(el.itertext()).split())
            dialogue.utterances.append(Utterance(
                utterance_id=f"{did}-{len(dialogue.utterances)}",
                speaker=speaker, position=len(dialogue.utterances),
                raw_text=text, source_tags=[(SCHEME, act)]))
            return
        for child in el:
            walk(child, speaker)

    walk(root, "?")
    return dialogue


def read(files: list[Path]) -> list[UnifiedDialogue]:
    return [read_file(p) for p in files]
