"""Feature extraction: vocabularies, sparse families, syntax, embeddings."""

import numpy as np
import pytest

from da_tagger.dialogues import (ROOT, DataFormatError, DATag,
                                 TokenAnnotation, UnifiedDialogue, UsageError,
                                 Utterance)
from da_tagger.features import (EmbeddingTable, FeatureConfig, Vocabulary,
                                attach_annotations, build_vocabulary, extract,
                                gold_prev_tag, load_conllu, load_embeddings)

from conftest import FIXTURES

SIDE = FIXTURES / "sidecars" / "fixtures.conllu"


def _utt(text, uid="u0", tokens=None, tags=None):
    return Utterance(utterance_id=uid, speaker="A", position=0, raw_text=text,
                     source_tags=[("s", "t")], normalized_text=text,
                     tokens=tokens, mapped_tags=tags)


def _corpus(texts):
    utts = [_utt(t, uid=f"u{i}") for i, t in enumerate(texts)]
    for i, u in enumerate(utts):
        u.position = i
    return [UnifiedDialogue(dialogue_id="d", corpus="CUSTOM", utterances=utts)]


# ------------------------------------------------------- configuration

def test_config_requires_a_family():
    with pytest.raises(UsageError):
        FeatureConfig(use_unigrams=False)
    FeatureConfig(use_unigrams=False, use_embeddings=True, embedding_dim=3)


def test_config_embeddings_need_dim():
    with pytest.raises(UsageError):
        FeatureConfig(use_embeddings=True)


def test_config_json_round_trip():
    cfg = FeatureConfig(use_bigrams=True, use_prev_da=True, use_ipos=True,
                        use_embeddings=True, embedding_dim=7)
    assert FeatureConfig.from_json(cfg.to_json()) == cfg
    assert cfg.needs_syntax
    assert not FeatureConfig(use_bigrams=True).needs_syntax


# -------------------------------------------------------- vocabularies

def test_vocabulary_grows_then_freezes():
    v = Vocabulary()
    assert v.id_of("a") == 0
    assert v.id_of("b") == 1
    assert v.id_of("a") == 0
    v.freeze()
    assert v.id_of("c") is None
    assert len(v) == 2
    assert "a" in v and "c" not in v
    assert v.names() == ["a", "b"]


def test_vocabulary_save_load(tmp_path):
    v = Vocabulary()
    for name in ("U=hello", "B=<s>|hello", "PREV=NONE"):
        v.id_of(name)
    p = tmp_path / "vocab.tsv"
    v.save(p)
    w = Vocabulary.load(p)
    assert w.frozen
    assert w.names() == v.names()
    assert all(w.id_of(n) == v.id_of(n) for n in v.names())


def test_vocabulary_load_rejects_gaps(tmp_path):
    p = tmp_path / "vocab.tsv"
    p.write_text("a\t0\nb\t2\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="consecutive"):
        Vocabulary.load(p)


def test_vocabulary_load_rejects_bad_line(tmp_path):
    p = tmp_path / "vocab.tsv"
    p.write_text("just-a-name\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        Vocabulary.load(p)


def test_build_vocabulary_groups_families_in_blocks():
    cfg = FeatureConfig(use_bigrams=True, use_prev_da=True)
    corpus = _corpus(["hello there", "there you are"])
    corpus[0].utterances[0].mapped_tags = [DATag("TASK", "Inform")]
    vocab = build_vocabulary(corpus, cfg)
    unis = [vocab.id_of(n) for n in vocab.names() if n.startswith("U=")]
    bis = [vocab.id_of(n) for n in vocab.names() if n.startswith("B=")]
    prevs = [vocab.id_of(n) for n in vocab.names() if n.startswith("PREV=")]
    assert unis and bis and prevs
    assert max(unis) < min(bis) < max(bis) < min(prevs)
    assert vocab.frozen
    # the dialogue-initial placeholder is always present
    assert "PREV=NONE" in vocab
    assert "PREV=Inform" in vocab


def test_build_vocabulary_shared_prefix_is_stable():
    # same data, richer config: the unigram block keeps its ids
    corpus = _corpus(["a b", "b c a"])
    v1 = build_vocabulary(corpus, FeatureConfig())
    v2 = build_vocabulary(corpus, FeatureConfig(use_bigrams=True))
    for name in v1.names():
        assert v2.id_of(name) == v1.id_of(name)


# ----------------------------------------------------- sparse families

def test_extract_unigrams_binary_and_sorted():
    corpus = _corpus(["the cat saw the cat"])
    vocab = build_vocabulary(corpus, FeatureConfig())
    fv = extract(corpus[0].utterances[0], None, FeatureConfig(), vocab)
    ids = [i for i, _ in fv.sparse]
    assert ids == sorted(ids)
    assert len(ids) == 3  # the, cat, saw: repeats collapse
    assert all(v == 1.0 for _, v in fv.sparse)


def test_extract_bigrams_are_padded():
    corpus = _corpus(["hi there"])
    cfg = FeatureConfig(use_bigrams=True)
    vocab = build_vocabulary(corpus, cfg)
    assert "B=<s>|hi" in vocab
    assert "B=hi|there" in vocab
    assert "B=there|</s>" in vocab


def test_extract_trigrams_are_padded():
    corpus = _corpus(["hi there"])
    cfg = FeatureConfig(use_trigrams=True)
    vocab = build_vocabulary(corpus, cfg)
    assert "T=<s>|hi|there" in vocab
    assert "T=hi|there|</s>" in vocab


def test_extract_prev_feature():
    corpus = _corpus(["a", "b"])
    corpus[0].utterances[0].mapped_tags = [DATag("TASK", "PropQ")]
    cfg = FeatureConfig(use_prev_da=True)
    vocab = build_vocabulary(corpus, cfg)
    u = corpus[0].utterances[1]
    with_prev = extract(u, "PropQ", cfg, vocab)
    no_prev = extract(u, None, cfg, vocab)
    assert (vocab.id_of("PREV=PropQ"), 1.0) in with_prev.sparse
    assert (vocab.id_of("PREV=NONE"), 1.0) in no_prev.sparse


def test_extract_ignores_unseen_words():
    corpus = _corpus(["known words"])
    vocab = build_vocabulary(corpus, FeatureConfig())
    fv = extract(_utt("totally novel"), None, FeatureConfig(), vocab)
    assert fv.sparse == []


def test_syntactic_families_strict_and_lenient():
    cfg = FeatureConfig(use_unigrams=False, use_ipos=True)
    vocab = Vocabulary()
    u = _utt("hi")  # no token annotations attached
    with pytest.raises(UsageError, match="token annotations"):
        extract(u, None, cfg, vocab, strict=True)
    assert extract(u, None, cfg, vocab, strict=False).sparse == []


def test_syntactic_feature_names_indexed_and_bagged():
    toks = [TokenAnnotation(0, "go", "VERB", "root", ROOT),
            TokenAnnotation(1, "south", "ADV", "advmod", 0)]
    u = _utt("go south", tokens=toks)
    cfg = FeatureConfig(use_pos=True, use_ipos=True, use_dep=True,
                        use_idep=True)
    vocab = build_vocabulary([UnifiedDialogue(
        dialogue_id="d", corpus="CUSTOM", utterances=[u])], cfg)
    names = set(vocab.names())
    assert {"POS=VERB", "POS=ADV", "POS@0=VERB", "POS@1=ADV",
            "DEP=root", "DEP=advmod", "DEP@0=root", "DEP@1=advmod"} <= names


# --------------------------------------------------------- embeddings

def test_embedding_mean_matches_brute_force():
    table = EmbeddingTable(3)
    table.vectors["red"] = np.array([1.0, 0.0, 2.0])
    table.vectors["blue"] = np.array([0.0, 3.0, 1.0])
    cfg = FeatureConfig(use_embeddings=True, embedding_dim=3)
    fv = extract(_utt("red blue zzz red"), None, cfg, Vocabulary(), emb=table)
    # mean over known occurrences, unknown words skipped
    expect = (table.vectors["red"] * 2 + table.vectors["blue"]) / 3.0
    assert np.allclose(fv.dense, expect)


def test_embedding_all_oov_gives_zero_vector():
    cfg = FeatureConfig(use_embeddings=True, embedding_dim=3)
    fv = extract(_utt("zzz qqq"), None, cfg, Vocabulary(),
                 emb=EmbeddingTable(3))
    assert fv.dense is not None and not fv.dense.any()


def test_embedding_errors():
    cfg = FeatureConfig(use_embeddings=True, embedding_dim=3)
    with pytest.raises(UsageError, match="no table"):
        extract(_utt("hi"), None, cfg, Vocabulary())
    with pytest.raises(UsageError, match="dimension"):
        extract(_utt("hi"), None, cfg, Vocabulary(), emb=EmbeddingTable(4))


def test_load_embeddings_fixture():
    table = load_embeddings(FIXTURES / "embeddings.txt", 5)
    assert table.dim == 5
    assert len(table) > 100
    v = table.lookup("the")
    assert v is not None and v.shape == (5,)
    # case falls back to the lowercase entry
    assert np.array_equal(table.lookup("THE"), v)


def test_load_embeddings_dimension_error(tmp_path):
    p = tmp_path / "emb.txt"
    p.write_text("word 1.0 2.0\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match=r"emb\.txt:1"):
        load_embeddings(p, 5)


def test_load_embeddings_value_error(tmp_path):
    p = tmp_path / "emb.txt"
    p.write_text("word 1.0 oops\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        load_embeddings(p, 2)


# ------------------------------------------------------- gold context

def test_gold_prev_tag_prefers_task_dimension():
    u = _utt("x", tags=[DATag("FEEDBACK", "Feedback"),
                        DATag("TASK", "Inform"),
                        DATag("SOM", "Thanking")])
    assert gold_prev_tag(u) == "Inform"
    u = _utt("x", tags=[DATag("FEEDBACK", "Feedback"),
                        DATag("SOM", "Thanking")])
    assert gold_prev_tag(u) == "Thanking"
    assert gold_prev_tag(_utt("x", tags=[])) is None
    assert gold_prev_tag(_utt("x")) is None


def test_gold_prev_tag_first_within_dimension():
    u = _utt("x", tags=[DATag("TASK", "PropQ"), DATag("TASK", "Inform")])
    assert gold_prev_tag(u) == "PropQ"


# ----------------------------------------------------------- sidecars

def test_load_conllu_fixture():
    anns = load_conllu(SIDE)
    assert len(anns) == 237
    block = anns["ES2002a-ESA.da1"]
    assert [t.form for t in block] == ["so", "the", "remote", "needs", "a",
                                       "new", "battery"]
    assert block[0].head == ROOT
    assert block[1].head == 0  # file convention is 1-based, ours 0-based
    assert block[0].dep_relation == "root"


def test_load_conllu_skips_ranges_and_empty_nodes(tmp_path):
    p = tmp_path / "s.conllu"
    p.write_text("# utterance_id = u1\n"
                 "1-2\tdel\t_\tX\t_\t_\t0\t_\t_\t_\n"
                 "1\tdo\tdo\tAUX\t_\t_\t0\troot\t_\t_\n"
                 "1.1\tghost\t_\tX\t_\t_\t1\t_\t_\t_\n"
                 "2\tit\tit\tPRON\t_\t_\t1\tobj\t_\t_\n\n",
                 encoding="utf-8")
    anns = load_conllu(p)
    assert [t.form for t in anns["u1"]] == ["do", "it"]


def test_load_conllu_errors(tmp_path):
    p = tmp_path / "s.conllu"
    p.write_text("1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="without an utterance_id"):
        load_conllu(p)
    p.write_text("# utterance_id = u1\n1\tx\tx\tX\t_\t_\t9\tdep\t_\t_\n",
                 encoding="utf-8")
    with pytest.raises(DataFormatError, match="out of range"):
        load_conllu(p)
    p.write_text("# utterance_id = u1\n1\tx\tx\tX\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="10 columns"):
        load_conllu(p)
    p.write_text("# utterance_id = u1\n1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n\n"
                 "# utterance_id = u1\n1\ty\ty\tX\t_\t_\t0\troot\t_\t_\n",
                 encoding="utf-8")
    with pytest.raises(DataFormatError, match="duplicate"):
        load_conllu(p)


# ----------------------------------------------------------- attaching

def test_attach_annotations_full_alignment(train_sets):
    # conftest prepared the corpora with these sidecars; everything the
    # sidecar file covers must have aligned
    for dialogues in train_sets.values():
        for d in dialogues:
            for u in d.utterances:
                assert u.tokens is not None, u.utterance_id
                assert [t.form for t in u.tokens] == u.normalized_text.split()


def test_attach_annotations_reports_mismatch():
    u = _utt("hello there", uid="m1")
    d = UnifiedDialogue(dialogue_id="d", corpus="CUSTOM", utterances=[u])
    anns = {"m1": [TokenAnnotation(0, "hello", "INTJ", "root", ROOT),
                   TokenAnnotation(1, "world", "NOUN", "dep", 0)]}
    report = attach_annotations([d], anns)
    assert report.mismatched == ["m1"]
    assert report.attached == 0
    assert u.tokens is None  # mismatches never attach


def test_attach_annotations_reports_missing():
    u = _utt("hello", uid="m2")
    d = UnifiedDialogue(dialogue_id="d", corpus="CUSTOM", utterances=[u])
    report = attach_annotations([d], {})
    assert report.missing == ["m2"]
    assert report.total == 1


def test_attach_annotations_requires_normalization():
    u = Utterance(utterance_id="m3", speaker="A", position=0, raw_text="x")
    d = UnifiedDialogue(dialogue_id="d", corpus="CUSTOM", utterances=[u])
    with pytest.raises(UsageError, match="normalize"):
        attach_annotations([d], {})
