"""Readers turning native corpus releases into unified dialogues.

Each reader handles one corpus family's on-disk layout and keeps source
tags byte-for-byte verbatim; interpretation happens later in mapping.
File enumeration is sorted so output never depends on filesystem order.
Every dialogue is stamped with its ingested utterance count, which later
serves as the denominator for retention statistics.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from ..dialogues import CorpusManifest, UnifiedDialogue, UsageError


def resolve_files(manifest: CorpusManifest, root: Path | str) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise UsageError(f"corpus root {root} is not a directory")
    files: list[Path] = []
    for pattern in manifest.file_globs:
        files.extend(root.glob(pattern))
    return sorted(set(files))


def stamp_ingest_counts(dialogues: list[UnifiedDialogue]) -> list[UnifiedDialogue]:
    for d in dialogues:
        d.metadata["utterances_ingested"] = str(len(d.utterances))
        d.check_positions()
    return dialogues


def _readers() -> dict[str, Callable]:
    from . import ami, dialogbank, lineformat, maptask, oasis, swda, verbmobil
    return {
        "SWDA": swda.read,
        "AMI": ami.read,
        "MAPTASK": maptask.read,
        "VERBMOBIL": verbmobil.read,
        "OASIS": oasis.read,
        "DIALOGBANK": dialogbank.read,
        "CAPC": lineformat.read_capc,
        "SLOGS": lineformat.read_slogs,
    }


def read_corpus(manifest: CorpusManifest, root: Path | str) -> list[UnifiedDialogue]:
    readers = _readers()
    reader = readers.get(manifest.corpus)
    if reader is None:
        raise UsageError(f"no reader for corpus {manifest.corpus!r}")
    files = resolve_files(manifest, root)
    dialogues = reader(files)
    stamp_ingest_counts(dialogues)
    manifest.verify(dialogues)
    return dialogues
