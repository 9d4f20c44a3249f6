"""Composes classifiers into the two experimental heads.

SWDA42 is the flat benchmark: one 42-way model over collapsed
Switchboard tags. ISO_SUBSET is the hierarchical head: three independent
binary dimension detectors, plus a function classifier for each dimension
that has more than one label (Task: 6 classes, SOM: 3; Feedback is
emitted as-is). A dimension fires when its detector's score is positive;
if none fires the highest-scoring dimension is used, so every utterance
receives at least one tag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .dialogues import (DATag, DataFormatError, UnifiedDialogue, UsageError,
                        Utterance)
from .features import (EmbeddingTable, FeatureConfig, Vocabulary,
                       build_vocabulary, extract, gold_prev_tag)
from .preprocess import collapse_swda_tag
from .svm import (LinearModel, TrainConfig, TrainingError, decision_scores,
                  load_model, predict, save_model, train_binary, train_ovr)
from .taxonomy import (DIMENSIONS, FEEDBACK_LABEL,
                       FUNCTION_LEVEL_FOR_DIMENSION, Taxonomy,
                       default_taxonomy, load_taxonomy)

SWDA42 = "SWDA42"
ISO_SUBSET = "ISO_SUBSET"

GOLD_PREV = "gold_prev"
PREDICTED_PREV = "predicted_prev"


def swda42_label(u: Utterance) -> str:
    """Collapsed 42-tag gold label of a Switchboard utterance."""
    if not u.source_tags:
        raise UsageError(f"{u.utterance_id}: no source tags")
    return collapse_swda_tag(u.source_tags[0][1])


def first_tag_in_dimension_order(tags: list[DATag]) -> Optional[str]:
    if not tags:
        return None
    rank = {d: i for i, d in enumerate(DIMENSIONS)}
    best = min(enumerate(tags), key=lambda p: (rank[p[1].dimension], p[0]))
    return best[1].node


@dataclass
class TaggerModel:
    mode: str
    feature_config: FeatureConfig
    vocab: Vocabulary
    taxonomy: Taxonomy
    swda_model: Optional[LinearModel] = None
    dimension_models: dict[str, LinearModel] = field(default_factory=dict)
    function_models: dict[str, LinearModel] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode == SWDA42:
            if self.swda_model is None:
                raise UsageError("SWDA42 model missing its flat classifier")
        elif self.mode == ISO_SUBSET:
            missing = [d for d in DIMENSIONS if d not in self.dimension_models]
            if missing:
                raise UsageError(
                    f"missing dimension models: {', '.join(missing)}")
            for dim, m in self.function_models.items():
                level = FUNCTION_LEVEL_FOR_DIMENSION[dim]
                expected = self.taxonomy.classifier_labels(level)
                if m.classes != expected:
                    raise UsageError(
                        f"{dim} function model classes {m.classes} do not "
                        f"match taxonomy labels {expected}")
        else:
            raise UsageError(f"unknown tagger mode {self.mode!r}")


@dataclass
class TaggedUtterance:
    utterance: Utterance
    predicted: list[DATag] = field(default_factory=list)
    flat_tag: Optional[str] = None
    scores: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "utterance_id": self.utterance.utterance_id,
            "predicted": [t.as_list() for t in self.predicted],
            "flat_tag": self.flat_tag,
            "scores": self.scores,
        }


def _function_training_set(dialogues: list[UnifiedDialogue], dim: str,
                           taxonomy: Taxonomy) -> list[tuple[Utterance, Optional[str], str]]:
    """(utterance, gold prev tag, function label) triples for one dimension.

    Only utterances tagged with a classifier label of that dimension's
    level contribute; coarser tags (e.g. a bare Question) are usable for
    dimension detection but not for function training. Multi-tag
    utterances contribute one example per qualifying tag.
    """
    level = FUNCTION_LEVEL_FOR_DIMENSION[dim]
    out = []
    for d in dialogues:
        for i, u in enumerate(d.utterances):
            if not u.mapped_tags:
                continue
            prev = gold_prev_tag(d.utterances[i - 1]) if i > 0 else None
            for t in u.mapped_tags:
                if t.dimension == dim and \
                        taxonomy.node(t.node).is_classifier_label(level):
                    out.append((u, prev, t.node))
    return out


def train_tagger(dialogues: list[UnifiedDialogue], feature_cfg: FeatureConfig,
                 train_cfg: TrainConfig, mode: str,
                 taxonomy: Optional[Taxonomy] = None,
                 emb: Optional[EmbeddingTable] = None,
                 n_jobs: int = 1) -> TaggerModel:
    if mode not in (SWDA42, ISO_SUBSET):
        raise UsageError(f"unknown tagger mode {mode!r}")
    taxonomy = taxonomy or default_taxonomy()

    if mode == SWDA42:
        vocab = build_vocabulary(dialogues, feature_cfg,
                                 prev_labeler=swda42_label)
        data = []
        labels_present: dict[str, None] = {}
        for d in dialogues:
            prev = None
            for u in d.utterances:
                fv = extract(u, prev, feature_cfg, vocab, emb, strict=False)
                lb = swda42_label(u)
                labels_present.setdefault(lb)
                data.append((fv, lb))
                prev = lb
        from .preprocess import canonical_tags
        classes = [t for t in canonical_tags() if t in labels_present]
        model = train_ovr(data, train_cfg, classes=classes,
                          n_sparse=len(vocab), feature_config=feature_cfg,
                          n_jobs=n_jobs)
        return TaggerModel(mode=mode, feature_config=feature_cfg, vocab=vocab,
                           taxonomy=taxonomy, swda_model=model)

    vocab = build_vocabulary(dialogues, feature_cfg)
    cache: list[tuple[Utterance, object]] = []
    for d in dialogues:
        for i, u in enumerate(d.utterances):
            if u.mapped_tags is None:
                raise UsageError(
                    f"{u.utterance_id}: map tags before training")
            prev = gold_prev_tag(d.utterances[i - 1]) if i > 0 else None
            cache.append((u, extract(u, prev, feature_cfg, vocab, emb,
                                     strict=False)))
    fv_of = {id(u): fv for u, fv in cache}

    dimension_models = {}
    for dim in DIMENSIONS:
        bin_data = [(fv, 1 if any(t.dimension == dim for t in u.mapped_tags)
                     else -1) for u, fv in cache]
        try:
            w = train_binary(bin_data, train_cfg, n_sparse=len(vocab))
        except TrainingError as e:
            raise TrainingError(f"dimension model {dim}: {e}") from e
        dimension_models[dim] = LinearModel(
            classes=[dim], weights=w.reshape(1, -1), n_sparse=len(vocab),
            dense_dim=len(w) - len(vocab) - 1, feature_config=feature_cfg)

    function_models = {}
    for dim in ("TASK", "SOM"):
        level = FUNCTION_LEVEL_FOR_DIMENSION[dim]
        classes = taxonomy.classifier_labels(level)
        triples = _function_training_set(dialogues, dim, taxonomy)
        data = [(fv_of[id(u)], node) for u, _prev, node in triples]
        try:
            function_models[dim] = train_ovr(
                data, train_cfg, classes=classes, n_sparse=len(vocab),
                feature_config=feature_cfg, n_jobs=n_jobs)
        except TrainingError as e:
            raise TrainingError(f"{dim} function model: {e}") from e

    return TaggerModel(mode=ISO_SUBSET, feature_config=feature_cfg,
                       vocab=vocab, taxonomy=taxonomy,
                       dimension_models=dimension_models,
                       function_models=function_models)


def _tag_one(model: TaggerModel, u: Utterance, prev: Optional[str],
             emb: Optional[EmbeddingTable]) -> TaggedUtterance:
    fv = extract(u, prev, model.feature_config, model.vocab, emb, strict=False)
    scores: dict[str, float] = {}
    fired = []
    for dim in DIMENSIONS:
        s = float(decision_scores(model.dimension_models[dim], fv)[0])
        scores[f"dim:{dim}"] = s
        if s > 0.0:
            fired.append(dim)
    if not fired:
        fired = [max(DIMENSIONS, key=lambda d: (scores[f"dim:{d}"],
                                                -DIMENSIONS.index(d)))]
    predicted = []
    for dim in fired:
        if dim in model.function_models:
            label, per_class = predict(model.function_models[dim], fv)
            for c, v in per_class.items():
                scores[f"fn:{dim}:{c}"] = v
            predicted.append(DATag(dimension=dim, node=label))
        else:
            predicted.append(DATag(dimension=dim, node=FEEDBACK_LABEL))
    return TaggedUtterance(utterance=u, predicted=predicted, scores=scores)


def tag(model: TaggerModel, dialogue: UnifiedDialogue,
        context: str = GOLD_PREV,
        emb: Optional[EmbeddingTable] = None) -> list[TaggedUtterance]:
    if context not in (GOLD_PREV, PREDICTED_PREV):
        raise UsageError(f"unknown context mode {context!r}")

    if model.mode == SWDA42:
        out = []
        prev: Optional[str] = None
        for u in dialogue.utterances:
            fv = extract(u, prev, model.feature_config, model.vocab, emb,
                         strict=False)
            label, per_class = predict(model.swda_model, fv)
            out.append(TaggedUtterance(utterance=u, flat_tag=label,
                                       scores=per_class))
            if context == PREDICTED_PREV:
                prev = label
            else:
                prev = swda42_label(u)
        return out

    out = []
    for i, u in enumerate(dialogue.utterances):
        if i == 0:
            prev = None
        elif context == GOLD_PREV:
            prev_u = dialogue.utterances[i - 1]
            if prev_u.mapped_tags is None:
                raise UsageError(
                    f"{prev_u.utterance_id}: gold context requested but "
                    "utterance has no mapped tags")
            prev = gold_prev_tag(prev_u)
        else:
            prev = first_tag_in_dimension_order(out[i - 1].predicted)
        out.append(_tag_one(model, u, prev, emb))
    return out


@dataclass(frozen=True)
class DimensionReport:
    """Detector accuracies plus three composite rates.

    overall_micro pools every scored (utterance, dimension) decision;
    overall_macro averages per-dimension accuracies; overall_joint is
    the fraction of utterances whose three decisions are all correct.
    Dimensions with no gold positives in the data still contribute
    decisions but gold_positives flags them so callers can report a gap
    instead of a vacuous accuracy.
    """
    accuracy: dict[str, float]
    gold_positives: dict[str, int]
    overall_micro: float
    overall_macro: float
    overall_joint: float


def evaluate_dimensions(model: TaggerModel,
                        dialogues: list[UnifiedDialogue],
                        context: str = GOLD_PREV,
                        emb: Optional[EmbeddingTable] = None,
                        speaker_filter=None) -> DimensionReport:
    """Binary accuracy of each dimension detector.

    The whole dialogue is tagged (context needs every utterance) but
    only utterances passing speaker_filter are scored.
    """
    if model.mode != ISO_SUBSET:
        raise UsageError("dimension evaluation needs an ISO_SUBSET model")
    hits = {d: 0 for d in DIMENSIONS}
    positives = {d: 0 for d in DIMENSIONS}
    total = 0
    joint_hits = 0
    for d in dialogues:
        tagged = tag(model, d, context=context, emb=emb)
        for u, t in zip(d.utterances, tagged):
            if speaker_filter is not None and not speaker_filter(u):
                continue
            total += 1
            gold_dims = {x.dimension for x in (u.mapped_tags or [])}
            all_right = True
            for dim in DIMENSIONS:
                if dim in gold_dims:
                    positives[dim] += 1
                if (t.scores[f"dim:{dim}"] > 0.0) == (dim in gold_dims):
                    hits[dim] += 1
                else:
                    all_right = False
            joint_hits += all_right
    if total == 0:
        raise UsageError("no utterances to evaluate")
    acc = {dim: hits[dim] / total for dim in DIMENSIONS}
    return DimensionReport(
        accuracy=acc, gold_positives=positives,
        overall_micro=sum(hits.values()) / (3 * total),
        overall_macro=sum(acc.values()) / 3,
        overall_joint=joint_hits / total)


def evaluate_functions_gold_dims(model: TaggerModel,
                                 dialogues: list[UnifiedDialogue],
                                 context: str = GOLD_PREV,
                                 emb: Optional[EmbeddingTable] = None
                                 ) -> dict[str, float]:
    """Function-classifier accuracy on gold-dimension utterances.

    Routing uses the gold dimension, so errors of the dimension stage do
    not propagate. Only dimensions with a function model are scored.
    """
    if model.mode != ISO_SUBSET:
        raise UsageError("function evaluation needs an ISO_SUBSET model")
    hits = {d: 0 for d in model.function_models}
    totals = {d: 0 for d in model.function_models}
    for d in dialogues:
        for i, u in enumerate(d.utterances):
            if not u.mapped_tags:
                continue
            if i == 0:
                prev = None
            elif context == GOLD_PREV:
                prev = gold_prev_tag(d.utterances[i - 1])
            else:
                raise UsageError(
                    "gold-dimension evaluation uses gold context only")
            fv = extract(u, prev, model.feature_config, model.vocab, emb,
                         strict=False)
            for t in u.mapped_tags:
                dim = t.dimension
                if dim not in model.function_models:
                    continue
                level = FUNCTION_LEVEL_FOR_DIMENSION[dim]
                if not model.taxonomy.node(t.node).is_classifier_label(level):
                    continue
                pred, _ = predict(model.function_models[dim], fv)
                totals[dim] += 1
                if pred == t.node:
                    hits[dim] += 1
    return {dim: (hits[dim] / totals[dim]) if totals[dim] else float("nan")
            for dim in model.function_models}


_BUNDLE_MANIFEST = "tagger.json"


def save_tagger(model: TaggerModel, out_dir: Path | str):
    """Model bundle: a directory of weight files plus vocabulary/taxonomy."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.vocab.save(out / "vocab.tsv")
    (out / "taxonomy.tsv").write_text(model.taxonomy.to_tsv(), encoding="utf-8")
    files: dict[str, str] = {}
    if model.swda_model is not None:
        save_model(model.swda_model, out / "flat.json")
        files["flat"] = "flat.json"
    for dim, m in model.dimension_models.items():
        name = f"dim_{dim}.json"
        save_model(m, out / name)
        files[f"dim:{dim}"] = name
    for dim, m in model.function_models.items():
        name = f"fn_{dim}.json"
        save_model(m, out / name)
        files[f"fn:{dim}"] = name
    doc = {"mode": model.mode,
           "feature_config": model.feature_config.to_json(),
           "files": files}
    (out / _BUNDLE_MANIFEST).write_text(json.dumps(doc, indent=1) + "\n",
                                        encoding="utf-8")


def load_tagger(bundle_dir: Path | str) -> TaggerModel:
    bundle = Path(bundle_dir)
    manifest = bundle / _BUNDLE_MANIFEST
    if not manifest.is_file():
        raise DataFormatError(f"{bundle}: not a tagger bundle "
                              f"(missing {_BUNDLE_MANIFEST})")
    doc = json.loads(manifest.read_text(encoding="utf-8"))
    vocab = Vocabulary.load(bundle / "vocab.tsv")
    taxonomy = load_taxonomy(bundle / "taxonomy.tsv")
    cfg = FeatureConfig.from_json(doc["feature_config"])
    swda_model = None
    dimension_models: dict[str, LinearModel] = {}
    function_models: dict[str, LinearModel] = {}
    for key, name in doc["files"].items():
        m = load_model(bundle / name)
        if key == "flat":
            swda_model = m
        elif key.startswith("dim:"):
            dimension_models[key[4:]] = m
        elif key.startswith("fn:"):
            function_models[key[3:]] = m
        else:
            raise DataFormatError(f"{bundle}: unknown bundle entry {key!r}")
    return TaggerModel(mode=doc["mode"], feature_config=cfg, vocab=vocab,
                       taxonomy=taxonomy, swda_model=swda_model,
                       dimension_models=dimension_models,
                       function_models=function_models)
