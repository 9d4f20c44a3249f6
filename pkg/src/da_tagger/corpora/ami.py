"""AMI meeting corpus reader (NXT-style annotation files).

One meeting spreads over per-speaker files: ``<meeting>.<S>.dialog-act.xml``
holds the DA segments, each pointing at a DA type in a shared
``da-types.xml`` and at a word range in ``<meeting>.<S>.words.xml``. The
emitted tag is the type's gloss (falling back to its short name). All
speakers' segments are interleaved into one dialogue ordered by the start
time of their first word, since a multi-party meeting has no two-sided
turn structure.
"""

from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "ami-da"

_HREF = re.compile(r"([^#]+)#id\(([^)]+)\)(?:\.\.id\(([^)]+)\))?")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(el: ET.Element, name: str) -> str | None:
    for key, value in el.attrib.items():
        if _local(key) == name:
            return value
    return None


def _parse(path: Path) -> ET.Element:
    try:
        return ET.parse(path).getroot()
    except ET.ParseError as e:
        raise DataFormatError(f"{path}: {e}") from e


class _Words:
    """One speaker's words file: id -> (text or None, start time)."""

    def __init__(self, path: Path):
        self.order: list[str] = []
        self.entries: dict[str, tuple[str | None, float]] = {}
        for el in _parse(path).iter():
            tag = _local(el.tag)
            if tag in ("w", "vocalsound", "gap", "disfmarker", "transformword"):
                wid = _attr(el, "id")
                if wid is None:
                    continue
                start = _attr(el, "starttime")
                text = (el.text or "").strip() if tag == "w" else None
                self.order.append(wid)
                self.entries[wid] = (
                    text or None,
                    float(start) if start is not None else math.inf)

    def span(self, start: str, end: str, origin: str) -> tuple[list[str], float]:
        try:
            i, j = self.order.index(start), self.order.index(end)
        except ValueError as e:
            raise DataFormatError(f"{origin}: unknown word id ({e})") from e
        words = [self.entries[wid][0] for wid in self.order[i:j + 1]
                 if self.entries[wid][0]]
        return words, self.entries[self.order[i]][1]


def _load_da_types(path: Path) -> dict[str, str]:
    types = {}
    for el in _parse(path).iter():
        tid = _attr(el, "id")
        if tid is None:
            continue
        gloss = _attr(el, "gloss") or _attr(el, "name")
        if gloss:
            types[tid] = gloss
    return types


def read(files: list[Path]) -> list[UnifiedDialogue]:
    meetings: dict[str, list] = {}
    words_cache: dict[Path, _Words] = {}
    types_cache: dict[Path, dict[str, str]] = {}
    for dact_path in files:
        if ".dialog-act." not in dact_path.name:
            continue
        parts = dact_path.name.split(".")
        meeting, speaker = parts[0], parts[1]
        for el in _parse(dact_path).iter():
            if _local(el.tag) != "dact":
                continue
            did = _attr(el, "id") or f"{speaker}-{len(meetings.get(meeting, []))}"
            tag_names: list[str] = []
            word_span = None
            for child in el:
                href = _attr(child, "href")
                if href is None:
                    continue
                m = _HREF.match(href)
                if not m:
                    raise DataFormatError(
                        f"{dact_path}: dact {did}: bad href {href!r}")
                target = dact_path.parent / m.group(1)
                start, end = m.group(2), m.group(3) or m.group(2)
                if _local(child.tag) == "pointer":
                    if target not in types_cache:
                        types_cache[target] = _load_da_types(target)
                    tag = types_cache[target].get(start)
                    if tag is None:
                        raise DataFormatError(
                            f"{dact_path}: dact {did}: unknown DA type {start!r}")
                    tag_names.append(tag)
                else:
                    if target not in words_cache:
                        words_cache[target] = _Words(target)
                    word_span = words_cache[target].span(
                        start, end, f"{dact_path}: dact {did}")
            if word_span is None:
                raise DataFormatError(f"{dact_path}: dact {did} has no words")
            if not tag_names:
                raise DataFormatError(f"{dact_path}: dact {did} has no DA type")
            words, starttime = word_span
            meetings.setdefault(meeting, []).append(
                (starttime, speaker, did, words, tag_names))
    dialogues = []
    for meeting in sorted(meetings):
        dialogue = UnifiedDialogue(dialogue_id=meeting, corpus="AMI")
        entries = sorted(meetings[meeting], key=lambda e: (e[0], e[1]))
        for starttime, speaker, did, words, tag_names in entries:
            dialogue.utterances.append(Utterance(
                utterance_id=f"{meeting}-{did}", speaker=speaker,
                position=len(dialogue.utterances), raw_text=" ".join(words),
                source_tags=[(SCHEME, t) for t in tag_names]))
        dialogues.append(dialogue)
    return dialogues
