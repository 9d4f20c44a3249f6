"""Regenerates the derived fixture artifacts under tests/fixtures/.

The corpus files themselves are hand-written; this tool derives the
pieces that must stay consistent with them: CoNLL-U sidecars aligned to
normalized tokens, a small embedding table, per-corpus manifests with
the observed counts, and the experiment config. Deterministic, so the
checked-in outputs are reproducible byte for byte.

Run from the repository root: python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

import numpy as np

from da_tagger.corpora import read_corpus
from da_tagger.dialogues import CorpusManifest, iter_utterances
from da_tagger.experiments import DEFAULT_GLOBS
from da_tagger.preprocess import drop_empty, normalize_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

_WH = {"what", "who", "where", "when", "why", "how", "which"}
_AUX = {"is", "are", "was", "were", "am", "be", "been", "do", "does", "did",
        "can", "could", "will", "would", "should", "have", "has", "had"}
_PRON = {"i", "you", "we", "they", "he", "she", "it", "me", "us", "them",
         "my", "your", "our", "their", "one", "anything", "everyone"}
_DET = {"the", "a", "an", "this", "that", "these", "those"}
_ADP = {"to", "of", "in", "on", "at", "for", "with", "by", "about", "near",
        "past", "until", "before", "after", "since", "up"}
_CONJ = {"and", "or", "but", "so"}
_INTJ = {"not", "no", "yes", "okay", "right", "uh", "um", "well", "oh",
         "yeah", "hi", "hello", "goodbye", "bye", "thanks", "thank",
         "sorry", "please", "fine", "sure"}

_DEPREL = {"WH": "obj", "AUX": "aux", "PRON": "nsubj", "DET": "det",
           "ADP": "case", "CCONJ": "cc", "INTJ": "discourse",
           "NUM": "nummod", "ADV": "advmod", "VERB": "xcomp", "NOUN": "dep"}


def pos_of(token: str) -> str:
    t = token.lower()
    if t in _WH:
        return "WH"
    if t in _AUX:
        return "AUX"
    if t in _PRON:
        return "PRON"
    if t in _DET:
        return "DET"
    if t in _ADP:
        return "ADP"
    if t in _CONJ:
        return "CCONJ"
    if t in _INTJ:
        return "INTJ"
    if t.isdigit():
        return "NUM"
    if t.endswith("ly"):
        return "ADV"
    if t.endswith("ing") or t.endswith("ed"):
        return "VERB"
    return "NOUN"


def conllu_block(utterance_id: str, tokens: list[str]) -> str:
    lines = [f"# utterance_id = {utterance_id}"]
    for i, form in enumerate(tokens, 1):
        pos = pos_of(form)
        head = 0 if i == 1 else 1
        rel = "root" if i == 1 else _DEPREL[pos]
        lines.append(
            f"{i}\t{form}\t{form.lower()}\t{pos}\t_\t_\t{head}\t{rel}\t_\t_")
    return "\n".join(lines) + "\n"


def main():
    all_utts = []
    token_counts: Counter = Counter()
    for corpus in sorted(DEFAULT_GLOBS):
        root = FIXTURES / corpus.lower()
        manifest = CorpusManifest(corpus=corpus,
                                  file_globs=DEFAULT_GLOBS[corpus])
        dialogues = read_corpus(manifest, root)
        manifest.expected_dialogues = len(dialogues)
        manifest.expected_utterances = sum(
            len(d.utterances) for d in dialogues)
        manifest.save(FIXTURES / "manifests" / f"{corpus.lower()}.json")
        normalize_corpus(dialogues)
        dialogues, _ = drop_empty(dialogues)
        for _d, u in iter_utterances(dialogues):
            toks = u.normalized_text.split()
            all_utts.append((u.utterance_id, toks))
            token_counts.update(toks)
        print(f"{corpus}: {manifest.expected_dialogues} dialogues, "
              f"{manifest.expected_utterances} utterances")

    blocks = [conllu_block(uid, toks) for uid, toks in all_utts]
    (FIXTURES / "sidecars" / "fixtures.conllu").write_text(
        "\n".join(blocks), encoding="utf-8")
    print(f"sidecars: {len(blocks)} utterances")

    # embedding table: every token seen at least twice; hapaxes stay OOV
    rng = np.random.Generator(np.random.PCG64(12345))
    words = sorted(w for w, c in token_counts.items() if c >= 2)
    lines = []
    for w in words:
        vec = rng.uniform(-1.0, 1.0, size=5)
        lines.append(w + " " + " ".join(f"{x:.6f}" for x in vec))
    (FIXTURES / "embeddings.txt").write_text("\n".join(lines) + "\n",
                                             encoding="utf-8")
    print(f"embeddings: {len(words)} words, 5 dims")

    config = {
        "seed": 0, "C": 0.1, "jobs": 1, "out_dir": "out",
        "embeddings": {"path": "embeddings.txt", "dim": 5},
        "sidecars": ["sidecars/fixtures.conllu"],
        "corpora": {
            c: {"root": c.lower(),
                "manifest": f"manifests/{c.lower()}.json",
                **({"split_file": "swda/split.tsv"} if c == "SWDA" else {})}
            for c in sorted(DEFAULT_GLOBS)
        },
    }
    (FIXTURES / "config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print("config.json written")


if __name__ == "__main__":
    main()
