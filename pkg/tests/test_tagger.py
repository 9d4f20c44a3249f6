"""Tagger composition: detectors plus function classifiers, both heads."""

import numpy as np
import pytest

from da_tagger.dialogues import (DATag, DataFormatError, UnifiedDialogue,
                                 UsageError, Utterance)
from da_tagger.features import FeatureConfig
from da_tagger.preprocess import canonical_tags
from da_tagger.svm import LinearModel, TrainConfig, TrainingError
from da_tagger.tagger import (GOLD_PREV, ISO_SUBSET, PREDICTED_PREV, SWDA42,
                              TaggerModel, evaluate_dimensions,
                              evaluate_functions_gold_dims,
                              first_tag_in_dimension_order, load_tagger,
                              save_tagger, swda42_label, tag, train_tagger)
from da_tagger.taxonomy import DIMENSIONS

TRAIN = TrainConfig(C=0.1, seed=0)


def _slice(dialogue, k):
    return UnifiedDialogue(dialogue_id=dialogue.dialogue_id,
                           corpus=dialogue.corpus,
                           utterances=dialogue.utterances[:k])


# ----------------------------------------------------------- labels

def test_swda42_label_collapses_first_tag():
    u = Utterance(utterance_id="u", speaker="A", position=0, raw_text="x",
                  source_tags=[("s", "sd,sv")])
    assert swda42_label(u) == "sd"
    with pytest.raises(UsageError):
        swda42_label(Utterance(utterance_id="u", speaker="A", position=0,
                               raw_text="x"))


def test_first_tag_in_dimension_order():
    assert first_tag_in_dimension_order([]) is None
    tags = [DATag("FEEDBACK", "Feedback"), DATag("TASK", "PropQ")]
    assert first_tag_in_dimension_order(tags) == "PropQ"
    tags = [DATag("SOM", "Thanking"), DATag("SOM", "Apology")]
    assert first_tag_in_dimension_order(tags) == "Thanking"


# -------------------------------------------------- model validation

def test_model_validation(iso_model):
    with pytest.raises(UsageError, match="flat classifier"):
        TaggerModel(mode=SWDA42, feature_config=iso_model.feature_config,
                    vocab=iso_model.vocab, taxonomy=iso_model.taxonomy)
    with pytest.raises(UsageError, match="missing dimension models"):
        TaggerModel(mode=ISO_SUBSET, feature_config=iso_model.feature_config,
                    vocab=iso_model.vocab, taxonomy=iso_model.taxonomy)
    with pytest.raises(UsageError, match="unknown tagger mode"):
        TaggerModel(mode="BOGUS", feature_config=iso_model.feature_config,
                    vocab=iso_model.vocab, taxonomy=iso_model.taxonomy)


def test_model_function_classes_must_match_taxonomy(iso_model):
    wrong = LinearModel(classes=["A", "B"],
                        weights=np.zeros((2, len(iso_model.vocab) + 1)),
                        n_sparse=len(iso_model.vocab), dense_dim=0,
                        feature_config=iso_model.feature_config)
    with pytest.raises(UsageError, match="do not\\s+match taxonomy"):
        TaggerModel(mode=ISO_SUBSET, feature_config=iso_model.feature_config,
                    vocab=iso_model.vocab, taxonomy=iso_model.taxonomy,
                    dimension_models=iso_model.dimension_models,
                    function_models={"TASK": wrong})


# ----------------------------------------------------- training errors

def test_training_without_som_coverage_names_the_dimension(train_sets):
    # MapTask maps nothing into social obligations management
    with pytest.raises(TrainingError, match="SOM"):
        train_tagger(train_sets["MAPTASK"], FeatureConfig(), TRAIN, ISO_SUBSET)


def test_training_without_a_function_label_names_it(train_sets):
    # Oasis covers every dimension but has no ChoiceQ source
    with pytest.raises(TrainingError, match="ChoiceQ"):
        train_tagger(train_sets["OASIS"], FeatureConfig(), TRAIN, ISO_SUBSET)


def test_training_requires_mapped_tags(swda_splits):
    train, _, _ = swda_splits
    with pytest.raises(UsageError, match="map tags"):
        train_tagger(train, FeatureConfig(), TRAIN, ISO_SUBSET)


def test_training_rejects_unknown_mode(all_train):
    with pytest.raises(UsageError, match="mode"):
        train_tagger(all_train, FeatureConfig(), TRAIN, "FLAT99")


# ------------------------------------------------------------ tagging

def test_every_utterance_gets_a_tag(iso_model, test_sets):
    for dialogues in test_sets.values():
        for d in dialogues:
            for t in tag(iso_model, d, context=GOLD_PREV):
                assert len(t.predicted) >= 1
                for p in t.predicted:
                    assert p.dimension in DIMENSIONS
                    assert p.node in iso_model.taxonomy


def test_predictions_follow_scores(iso_model, test_sets):
    d = test_sets["DIALOGBANK"][0]
    for t in tag(iso_model, d, context=GOLD_PREV):
        fired = {p.dimension for p in t.predicted}
        positive = {dim for dim in DIMENSIONS if t.scores[f"dim:{dim}"] > 0.0}
        if positive:
            assert fired == positive
        else:
            # fallback: single best-scoring dimension
            assert len(fired) == 1
            best = max(DIMENSIONS, key=lambda x: t.scores[f"dim:{x}"])
            assert fired == {best}
        # function scores exist for fired dimensions that have a model
        for p in t.predicted:
            if p.dimension in iso_model.function_models:
                key = f"fn:{p.dimension}:{p.node}"
                assert key in t.scores
            else:
                assert p.node == "Feedback"


def test_tagging_is_deterministic(iso_model, test_sets):
    d = test_sets["SLOGS"][0]
    a = [t.to_json() for t in tag(iso_model, d, context=PREDICTED_PREV)]
    b = [t.to_json() for t in tag(iso_model, d, context=PREDICTED_PREV)]
    assert a == b


def test_tagging_is_causal(iso_model, test_sets):
    # truncating the future must not change past predictions
    d = test_sets["SLOGS"][0]
    full = tag(iso_model, d, context=PREDICTED_PREV)
    for k in (1, 3, len(d.utterances)):
        part = tag(iso_model, _slice(d, k), context=PREDICTED_PREV)
        assert [t.to_json() for t in part] == [t.to_json() for t in full[:k]]


def test_som_scores_do_not_leak_into_other_dimensions(iso_model, test_sets):
    som = iso_model.dimension_models["SOM"]
    perturbed = TaggerModel(
        mode=ISO_SUBSET, feature_config=iso_model.feature_config,
        vocab=iso_model.vocab, taxonomy=iso_model.taxonomy,
        dimension_models={**iso_model.dimension_models,
                          "SOM": LinearModel(
                              classes=som.classes, weights=-som.weights,
                              n_sparse=som.n_sparse, dense_dim=som.dense_dim,
                              feature_config=som.feature_config)},
        function_models=iso_model.function_models)
    d = test_sets["DIALOGBANK"][0]
    base = tag(iso_model, d, context=GOLD_PREV)
    swapped = tag(perturbed, d, context=GOLD_PREV)
    for t0, t1 in zip(base, swapped):
        assert t1.scores["dim:TASK"] == t0.scores["dim:TASK"]
        assert t1.scores["dim:FEEDBACK"] == t0.scores["dim:FEEDBACK"]
        assert t1.scores["dim:SOM"] == -t0.scores["dim:SOM"]


def test_tag_rejects_unknown_context(iso_model, test_sets):
    with pytest.raises(UsageError, match="context"):
        tag(iso_model, test_sets["SLOGS"][0], context="both")


def test_gold_context_requires_mapped_previous(iso_model):
    u0 = Utterance(utterance_id="a", speaker="A", position=0, raw_text="hi",
                   source_tags=[("s", "t")], normalized_text="hi")
    u1 = Utterance(utterance_id="b", speaker="B", position=1, raw_text="yes",
                   source_tags=[("s", "t")], normalized_text="yes")
    d = UnifiedDialogue(dialogue_id="d", corpus="CUSTOM", utterances=[u0, u1])
    with pytest.raises(UsageError, match="gold context"):
        tag(iso_model, d, context=GOLD_PREV)
    # predicted context has no such requirement
    assert len(tag(iso_model, d, context=PREDICTED_PREV)) == 2


def test_flat_head_produces_canonical_tags(flat_model, swda_splits):
    _, _, test = swda_splits
    for d in test:
        for t in tag(flat_model, d, context=PREDICTED_PREV):
            assert t.flat_tag in canonical_tags()
            assert t.predicted == []
            assert set(t.scores) == set(flat_model.swda_model.classes)


def test_tagged_utterance_json(iso_model, test_sets):
    d = test_sets["CAPC"][0]
    j = tag(iso_model, d, context=GOLD_PREV)[0].to_json()
    assert set(j) == {"utterance_id", "predicted", "flat_tag", "scores"}
    assert j["flat_tag"] is None
    assert all(isinstance(p, list) and len(p) == 2 for p in j["predicted"])


# ------------------------------------------------------- evaluation

def test_evaluate_dimensions_report(iso_model, test_sets):
    rep = evaluate_dimensions(iso_model, test_sets["DIALOGBANK"])
    for dim in DIMENSIONS:
        assert 0.0 <= rep.accuracy[dim] <= 1.0
        assert rep.gold_positives[dim] > 0
    assert 0.0 <= rep.overall_joint <= rep.overall_micro <= 1.0
    macro = sum(rep.accuracy.values()) / 3
    assert rep.overall_macro == pytest.approx(macro)


def test_evaluate_dimensions_speaker_filter(iso_model, test_sets):
    full = evaluate_dimensions(iso_model, test_sets["SLOGS"])
    users = evaluate_dimensions(iso_model, test_sets["SLOGS"],
                                speaker_filter=lambda u: u.speaker == "U")
    assert sum(users.gold_positives.values()) < sum(full.gold_positives.values())


def test_evaluate_dimensions_needs_iso(flat_model, swda_splits):
    with pytest.raises(UsageError):
        evaluate_dimensions(flat_model, swda_splits[2])


def test_evaluate_dimensions_empty(iso_model):
    with pytest.raises(UsageError, match="no utterances"):
        evaluate_dimensions(iso_model, [])


def test_evaluate_functions_gold_dims(iso_model, test_sets):
    accs = evaluate_functions_gold_dims(iso_model, test_sets["DIALOGBANK"])
    assert set(accs) == {"TASK", "SOM"}
    for v in accs.values():
        assert 0.0 <= v <= 1.0
    with pytest.raises(UsageError, match="gold context"):
        evaluate_functions_gold_dims(iso_model, test_sets["DIALOGBANK"],
                                     context=PREDICTED_PREV)


# ---------------------------------------------------------- bundles

def test_bundle_round_trip_iso(iso_model, test_sets, tmp_path):
    save_tagger(iso_model, tmp_path / "bundle")
    again = load_tagger(tmp_path / "bundle")
    assert again.mode == ISO_SUBSET
    for corpus, dialogues in test_sets.items():
        for d in dialogues:
            a = [t.to_json() for t in tag(iso_model, d, context=GOLD_PREV)]
            b = [t.to_json() for t in tag(again, d, context=GOLD_PREV)]
            assert a == b, corpus


def test_bundle_round_trip_flat(flat_model, swda_splits, tmp_path):
    save_tagger(flat_model, tmp_path / "bundle")
    again = load_tagger(tmp_path / "bundle")
    _, _, test = swda_splits
    for d in test:
        a = [t.to_json() for t in tag(flat_model, d, context=PREDICTED_PREV)]
        b = [t.to_json() for t in tag(again, d, context=PREDICTED_PREV)]
        assert a == b


def test_load_tagger_rejects_non_bundle(tmp_path):
    with pytest.raises(DataFormatError, match="not a tagger bundle"):
        load_tagger(tmp_path)
