"""HCRC Map Task reader: move annotations plus timed word units.

Each dialogue is a pair of files: ``<id>.moves.xml`` whose move elements
carry the DA label and a word range, and ``<id>.timed-units.xml`` holding
the words themselves. A move's text is the words its href range covers::

    <move id="m1" who="g" label="instruct"
          href="q1ec1.timed-units.xml#id(w1)..id(w4)"/>

Both hyphenated and underscored label variants exist in the wild; they
are emitted verbatim and the rule table covers both.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from pathlib import Path

from ..dialogues import DataFormatError, UnifiedDialogue, Utterance

SCHEME = "maptask-move"

_HREF = re.compile(r"([^#]+)#id\(([^)]+)\)(?:\.\.id\(([^)]+)\))?")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attr(el: ET.Element, name: str) -> str | None:
    for key, value in el.attrib.items():
        if _local(key) == name:
            return value
    return None


def _load_timed_units(path: Path) -> list[tuple[str, str]]:
    try:
        tree = ET.parse(path)
    except ET.ParseError as e:
        raise DataFormatError(f"{path}: {e}") from e
    units = []
    for el in tree.getroot().iter():
        if _local(el.tag) == "tu":
            uid = _attr(el, "id")
            if uid is None:
                raise DataFormatError(f"{path}: timed unit without id")
            units.append((uid, (el.text or "").strip()))
    return units


def _words_in_range(units: list[tuple[str, str]], start: str, end: str,
                    origin: str) -> list[str]:
    ids = [uid for uid, _ in units]
    try:
        i, j = ids.index(start), ids.index(end)
    except ValueError as e:
        raise DataFormatError(f"{origin}: href names unknown unit ({e})") from e
    if j < i:
        raise DataFormatError(f"{origin}: href range {start}..{end} reversed")
    return [w for _, w in units[i:j + 1] if w]


def read_file(moves_path: Path) -> UnifiedDialogue:
    did = moves_path.name.split(".")[0]
    try:
        tree = ET.parse(moves_path)
    except ET.ParseError as e:
        raise DataFormatError(f"{moves_path}: {e}") from e
    units_cache: dict[Path, list[tuple[str, str]]] = {}
    dialogue = UnifiedDialogue(dialogue_id=did, corpus="MAPTASK")
    for el in tree.getroot().iter():
        if _local(el.tag) != "move":
            continue
        label = _attr(el, "label")
        who = _attr(el, "who") or "?"
        href = _attr(el, "href")
        mid = _attr(el, "id") or f"m{len(dialogue.utterances)}"
        if label is None or href is None:
            raise DataFormatError(
                f"{moves_path}: move {mid} lacks label or href")
        m = _HREF.match(href)
        if not m:
            raise DataFormatError(f"{moves_path}: move {mid}: bad href {href!r}")
        tu_file, start, end = m.group(1), m.group(2), m.group(3) or m.group(2)
        tu_path = moves_path.parent / tu_file
        if tu_path not in units_cache:
            units_cache[tu_path] = _load_timed_units(tu_path)
        words = _words_in_range(units_cache[tu_path], start, end,
                                f"{moves_path}: move {mid}")
        dialogue.utterances.append(Utterance(
            utterance_id=f"{did}-{mid}", speaker=who,
            position=len(dialogue.utterances), raw_text=" ".join(words),
            source_tags=[(SCHEME, label)]))
    return dialogue


def read(files: list[Path]) -> list[UnifiedDialogue]:
    return [read_file(p) for p in files if ".moves." in p.name]
