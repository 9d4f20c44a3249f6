"""Experiment drivers: the named studies behind the result tables.

Four studies are exposed, one per table of results:

- flat feature study: 42-tag Switchboard benchmark across feature sets;
- dimension evaluation: the three binary dimension detectors;
- function feature study: Task-function accuracy with gold dimensions;
- corpus ablation: retraining with corpora held out.

Every driver is deterministic for a fixed seed and writes both a
machine-readable TSV and an aligned plain-text rendering. Feature
combinations carry the row names used in the result tables.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .corpora import read_corpus
from .dialogues import CorpusManifest, UnifiedDialogue, UsageError
from .evaluation import accuracy, majority_baseline, mcnemar
from .features import (EmbeddingTable, FeatureConfig, attach_annotations,
                       extract, gold_prev_tag, load_conllu, load_embeddings)
from .mapping import default_rules, map_corpus
from .preprocess import drop_empty, normalize_corpus
from .svm import TrainConfig, TrainingError, predict
from .tagger import (GOLD_PREV, ISO_SUBSET, SWDA42, TaggerModel,
                     evaluate_dimensions, swda42_label, tag, train_tagger)
from .taxonomy import FUNCTION_LEVEL_FOR_DIMENSION, Taxonomy, default_taxonomy

log = logging.getLogger("da.experiments")

TRAINING_CORPORA = ("SWDA", "AMI", "MAPTASK", "VERBMOBIL", "OASIS")
TEST_CORPORA = ("DIALOGBANK", "CAPC", "SLOGS")

_BASE = dict(use_unigrams=True, use_bigrams=True)


def _cfg(**kw) -> FeatureConfig:
    return FeatureConfig(**{**_BASE, **kw})


# Feature combinations of the flat benchmark, in presentation order.
FLAT_COMBOS: tuple[tuple[str, FeatureConfig], ...] = (
    ("1-grams", FeatureConfig(use_unigrams=True)),
    ("1-2-grams", _cfg()),
    ("1-2-3-grams", _cfg(use_trigrams=True)),
    ("1-2-grams + PREV", _cfg(use_prev_da=True)),
    ("1-2-grams + PREV + POS", _cfg(use_prev_da=True, use_pos=True)),
    ("1-2-grams + PREV + I-POS", _cfg(use_prev_da=True, use_ipos=True)),
    ("1-2-grams + PREV + I-POS + DEP",
     _cfg(use_prev_da=True, use_ipos=True, use_dep=True)),
    ("1-2-grams + PREV + I-POS + I-DEP",
     _cfg(use_prev_da=True, use_ipos=True, use_idep=True)),
)
# The word-embedding row needs the dimension filled in at run time.
FLAT_WE_COMBO = "1-2-grams + PREV + I-POS + WE"

ISO_COMBOS: tuple[tuple[str, FeatureConfig], ...] = (
    ("1-2-grams", _cfg()),
    ("+ PREV", _cfg(use_prev_da=True)),
    ("+ I-POS", _cfg(use_prev_da=True, use_ipos=True)),
    ("+ I-DEP", _cfg(use_prev_da=True, use_ipos=True, use_idep=True)),
)
ISO_WE_COMBOS = ("+ WE", "+ I-DEP + WE")

# Fixed feature set of the ablation study (and the dimension models).
BEST_ISO = _cfg(use_prev_da=True, use_ipos=True, use_idep=True)

ABLATION_SETS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("ALL", TRAINING_CORPORA),
    ("SWDA only", ("SWDA",)),
    ("AMI only", ("AMI",)),
    ("- AMI", tuple(c for c in TRAINING_CORPORA if c != "AMI")),
    ("- SWDA", tuple(c for c in TRAINING_CORPORA if c != "SWDA")),
    ("- Oasis BT", tuple(c for c in TRAINING_CORPORA if c != "OASIS")),
    ("- MapTask", tuple(c for c in TRAINING_CORPORA if c != "MAPTASK")),
    ("- VerbMobil", tuple(c for c in TRAINING_CORPORA if c != "VERBMOBIL")),
)


def iso_we_combo(name: str, dim: int) -> FeatureConfig:
    if name == "+ WE":
        return _cfg(use_prev_da=True, use_ipos=True, use_embeddings=True,
                    embedding_dim=dim)
    if name == "+ I-DEP + WE":
        return _cfg(use_prev_da=True, use_ipos=True, use_idep=True,
                    use_embeddings=True, embedding_dim=dim)
    if name == FLAT_WE_COMBO:
        return _cfg(use_prev_da=True, use_ipos=True, use_embeddings=True,
                    embedding_dim=dim)
    raise UsageError(f"unknown embedding combination {name!r}")


DEFAULT_GLOBS = {
    "SWDA": ["**/*.utt"],
    "AMI": ["**/*.dialog-act.xml"],
    "MAPTASK": ["**/*.moves.xml"],
    "VERBMOBIL": ["**/*.txt"],
    "OASIS": ["**/*.xml"],
    "DIALOGBANK": ["**/*.tsv"],
    "CAPC": ["**/*.txt"],
    "SLOGS": ["**/*.txt"],
}


@dataclass
class CorpusLocation:
    corpus: str
    root: Path
    globs: list[str] = field(default_factory=list)
    manifest: Optional[Path] = None
    split_file: Optional[Path] = None

    def load_manifest(self) -> CorpusManifest:
        if self.manifest is not None:
            return CorpusManifest.load(self.manifest)
        return CorpusManifest(corpus=self.corpus,
                              file_globs=self.globs or DEFAULT_GLOBS[self.corpus])


@dataclass
class ExperimentConfig:
    corpora: dict[str, CorpusLocation]
    embeddings_path: Optional[Path] = None
    embedding_dim: int = 0
    sidecars: list[Path] = field(default_factory=list)
    C: float = 0.1
    seed: int = 0
    jobs: int = 1
    out_dir: Path = Path("out")

    @staticmethod
    def load(path: Path | str, overrides: Optional[dict] = None) -> "ExperimentConfig":
        base = Path(path).parent
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        doc.update(overrides or {})

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        corpora = {}
        for name, entry in doc.get("corpora", {}).items():
            name = name.upper()
            corpora[name] = CorpusLocation(
                corpus=name, root=resolve(entry["root"]),
                globs=list(entry.get("globs", [])),
                manifest=resolve(entry["manifest"]) if "manifest" in entry else None,
                split_file=resolve(entry["split_file"]) if "split_file" in entry else None)
        emb = doc.get("embeddings") or {}
        return ExperimentConfig(
            corpora=corpora,
            embeddings_path=resolve(emb["path"]) if "path" in emb else None,
            embedding_dim=int(emb.get("dim", 0)),
            sidecars=[resolve(p) for p in doc.get("sidecars", [])],
            C=float(doc.get("C", 0.1)), seed=int(doc.get("seed", 0)),
            jobs=int(doc.get("jobs", 1)),
            out_dir=resolve(doc.get("out_dir", "out")))

    def embeddings(self) -> Optional[EmbeddingTable]:
        if self.embeddings_path is None:
            return None
        if self.embedding_dim <= 0:
            raise UsageError("embeddings given without a dimension")
        return load_embeddings(self.embeddings_path, self.embedding_dim)

    def train_config(self) -> TrainConfig:
        return TrainConfig(C=self.C, seed=self.seed)


def ingest(location: CorpusLocation) -> list[UnifiedDialogue]:
    return read_corpus(location.load_manifest(), location.root)


def prepare(location: CorpusLocation, taxonomy: Taxonomy,
            sidecars: Optional[dict] = None,
            mapped: bool = True) -> list[UnifiedDialogue]:
    """Ingest, normalize, drop empties, and (optionally) map one corpus."""
    dialogues = ingest(location)
    normalize_corpus(dialogues)
    dialogues, _ = drop_empty(dialogues)
    if mapped:
        rules = default_rules(location.corpus, taxonomy)
        dialogues, _report = map_corpus(dialogues, rules, taxonomy)
    if sidecars:
        attach_annotations(dialogues, sidecars)
    return dialogues


def load_sidecars(paths: list[Path]) -> dict:
    merged: dict = {}
    for p in paths:
        for uid, anns in load_conllu(p).items():
            if uid in merged:
                raise UsageError(f"duplicate sidecar annotations for {uid}")
            merged[uid] = anns
    return merged


def split_swda(dialogues: list[UnifiedDialogue],
               split_file: Optional[Path] = None
               ) -> tuple[list[UnifiedDialogue], list[UnifiedDialogue],
                          list[UnifiedDialogue]]:
    """Partition into train/dev/test.

    With a split file (lines of ``dialogue_id<TAB>train|dev|test``,
    conversation aliases like sw2005 accepted), assignments are explicit.
    Without one, the standard benchmark split is reconstructed for a full
    release by sorted dialogue id: the last 19 dialogues are the test
    set, the 21 before them the development set. Small collections must
    supply a split file.
    """
    from .corpora.swda import conversation_alias
    if split_file is not None:
        table = {}
        for lineno, line in enumerate(
                Path(split_file).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in ("train", "dev", "test"):
                raise UsageError(
                    f"{split_file}:{lineno}: expected id<TAB>train|dev|test")
            table[parts[0]] = parts[1]
        out = {"train": [], "dev": [], "test": []}
        for d in dialogues:
            split = table.get(d.dialogue_id) or table.get(
                conversation_alias(d.dialogue_id))
            if split is None:
                raise UsageError(
                    f"{split_file}: no split assignment for {d.dialogue_id}")
            d.metadata["split"] = split
            out[split].append(d)
        return out["train"], out["dev"], out["test"]
    if len(dialogues) < 41:
        raise UsageError(
            "too few dialogues to reconstruct the standard split; "
            "provide a split file")
    ordered = sorted(dialogues, key=lambda d: d.dialogue_id)
    test, dev, train = ordered[-19:], ordered[-40:-19], ordered[:-40]
    for d, s in ((train, "train"), (dev, "dev"), (test, "test")):
        for x in d:
            x.metadata["split"] = s
    return train, dev, test


@dataclass
class Table:
    """A small result table: header plus rows of stringified cells."""
    title: str
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def add(self, *cells):
        self.rows.append([str(c) for c in cells])

    def to_tsv(self) -> str:
        lines = ["\t".join(self.header)]
        lines += ["\t".join(r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        table = [self.header] + self.rows
        widths = [max(len(r[i]) for r in table) for i in range(len(self.header))]
        lines = [self.title, ""]
        for idx, row in enumerate(table):
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if idx == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def save(self, out_dir: Path, stem: str):
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{stem}.tsv").write_text(self.to_tsv(), encoding="utf-8")
        (out_dir / f"{stem}.txt").write_text(self.to_text(), encoding="utf-8")


def _fmt(x: Optional[float]) -> str:
    return "--" if x is None else f"{100.0 * x:.1f}"


def _flat_predictions(train, test, cfg, train_cfg, emb, jobs):
    model = train_tagger(train, cfg, train_cfg, SWDA42, emb=emb, n_jobs=jobs)
    preds, golds = [], []
    for d in test:
        for t in tag(model, d, context=GOLD_PREV, emb=emb):
            preds.append(t.flat_tag)
            golds.append(swda42_label(t.utterance))
    return preds, golds


def run_flat_feature_study(train, dev, test, train_cfg: TrainConfig,
                           emb: Optional[EmbeddingTable] = None,
                           jobs: int = 1) -> Table:
    """Feature-combination accuracies on the 42-tag benchmark.

    Each row is McNemar-tested against the preceding row; significant
    gains are starred.
    """
    del dev  # the C value in train_cfg is assumed already tuned
    combos = list(FLAT_COMBOS)
    if emb is not None:
        combos.append((FLAT_WE_COMBO, iso_we_combo(FLAT_WE_COMBO, emb.dim)))
    table = Table(title="Feature combinations, 42-tag benchmark",
                  header=["features", "accuracy", "significant", "p_prev"])
    train_labels = [swda42_label(u) for d in train for u in d.utterances]
    golds = [swda42_label(u) for d in test for u in d.utterances]
    table.add("BL: Majority", _fmt(majority_baseline(train_labels, golds)),
              "", "")
    prev_preds = None
    for name, cfg in combos:
        preds, golds2 = _flat_predictions(
            train, test, cfg, train_cfg, emb if cfg.use_embeddings else None,
            jobs)
        star, p_text = "", ""
        if prev_preds is not None:
            res = mcnemar(preds, prev_preds, golds2)
            star = "*" if res.significant and \
                accuracy(preds, golds2) > accuracy(prev_preds, golds2) else ""
            p_text = f"{res.p_value:.4f}"
        table.add(name, _fmt(accuracy(preds, golds2)), star, p_text)
        prev_preds = preds
    return table


def _train_iso(train, cfg, train_cfg, emb, jobs, taxonomy) -> TaggerModel:
    return train_tagger(train, cfg, train_cfg, ISO_SUBSET, taxonomy=taxonomy,
                        emb=emb if cfg.use_embeddings else None, n_jobs=jobs)


def _slogs_filter(corpus: str) -> Optional[Callable]:
    # session logs are scored on user turns only; machine turns still
    # supply context. Accepts both the corpus key and the display name.
    if corpus.replace("-", "").upper() == "SLOGS":
        return lambda u: u.speaker == "U"
    return None


def _function_instances(model: TaggerModel, dialogues, dim: str,
                        emb, speaker_filter=None):
    """(prediction, gold) pairs for one dimension's function classifier."""
    level = FUNCTION_LEVEL_FOR_DIMENSION[dim]
    preds, golds = [], []
    for d in dialogues:
        for i, u in enumerate(d.utterances):
            if speaker_filter is not None and not speaker_filter(u):
                continue
            if not u.mapped_tags:
                continue
            gold_nodes = [t.node for t in u.mapped_tags
                          if t.dimension == dim and
                          model.taxonomy.node(t.node).is_classifier_label(level)]
            if not gold_nodes:
                continue
            prev = gold_prev_tag(d.utterances[i - 1]) if i > 0 else None
            fv = extract(u, prev, model.feature_config, model.vocab,
                         emb if model.feature_config.use_embeddings else None,
                         strict=False)
            pred, _ = predict(model.function_models[dim], fv)
            for g in gold_nodes:
                preds.append(pred)
                golds.append(g)
    return preds, golds


def run_function_feature_study(train, test_sets: dict[str, list],
                               train_cfg: TrainConfig,
                               emb: Optional[EmbeddingTable] = None,
                               jobs: int = 1,
                               taxonomy: Optional[Taxonomy] = None) -> Table:
    """Task-function accuracy per feature set, gold dimension routing."""
    taxonomy = taxonomy or default_taxonomy()
    combos = list(ISO_COMBOS)
    if emb is not None:
        combos += [(n, iso_we_combo(n, emb.dim)) for n in ISO_WE_COMBOS]
    names = list(test_sets)
    table = Table(title="Task communicative-function accuracy, gold dimensions",
                  header=["features"] + list(names)
                  + [f"{n}_sig" for n in names])

    level = FUNCTION_LEVEL_FOR_DIMENSION["TASK"]
    train_labels = []
    for d in train:
        for u in d.utterances:
            for t in (u.mapped_tags or []):
                if t.dimension == "TASK" and \
                        taxonomy.node(t.node).is_classifier_label(level):
                    train_labels.append(t.node)
    bl_row = ["BL: Majority"]
    for name in names:
        golds = []
        filt = _slogs_filter(name)
        for d in test_sets[name]:
            for u in d.utterances:
                if filt is not None and not filt(u):
                    continue
                for t in (u.mapped_tags or []):
                    if t.dimension == "TASK" and \
                            taxonomy.node(t.node).is_classifier_label(level):
                        golds.append(t.node)
        bl_row.append(_fmt(majority_baseline(train_labels, golds))
                      if golds else "--")
    table.rows.append(bl_row + [""] * len(names))

    prev_preds: dict[str, list] = {}
    for combo_name, cfg in combos:
        model = _train_iso(train, cfg, train_cfg, emb, jobs, taxonomy)
        row = [combo_name]
        sig_row = []
        for name in names:
            preds, golds = _function_instances(
                model, test_sets[name], "TASK",
                emb if cfg.use_embeddings else None, _slogs_filter(name))
            if not golds:
                row.append("--")
                sig_row.append("")
                continue
            acc = accuracy(preds, golds)
            row.append(_fmt(acc))
            if name in prev_preds and len(prev_preds[name]) == len(preds):
                res = mcnemar(preds, prev_preds[name], golds)
                prev_acc = accuracy(prev_preds[name], golds)
                sig_row.append("*" if res.significant and acc > prev_acc else "")
            else:
                sig_row.append("")
            prev_preds[name] = preds
        table.rows.append(row + sig_row)
    return table


def run_dimension_eval(train, test_sets: dict[str, list],
                       train_cfg: TrainConfig,
                       emb: Optional[EmbeddingTable] = None,
                       jobs: int = 1,
                       taxonomy: Optional[Taxonomy] = None) -> Table:
    """Binary dimension-detector accuracies on each test set."""
    taxonomy = taxonomy or default_taxonomy()
    model = _train_iso(train, BEST_ISO, train_cfg, emb, jobs, taxonomy)
    names = list(test_sets)
    table = Table(title="Semantic dimension detection accuracy",
                  header=["dimension"] + names)
    reports = {name: evaluate_dimensions(model, test_sets[name],
                                         speaker_filter=_slogs_filter(name))
               for name in names}
    for dim in ("TASK", "SOM", "FEEDBACK"):
        table.add(dim, *[_fmt(reports[n].accuracy[dim])
                         if reports[n].gold_positives[dim] else "--"
                         for n in names])
    for key in ("overall_micro", "overall_macro", "overall_joint"):
        table.add(key, *[_fmt(getattr(reports[n], key)) for n in names])
    return table


def run_ablation(train_sets: dict[str, list], test_sets: dict[str, list],
                 train_cfg: TrainConfig,
                 emb: Optional[EmbeddingTable] = None, jobs: int = 1,
                 taxonomy: Optional[Taxonomy] = None,
                 subsets=ABLATION_SETS) -> Table:
    """Task-function accuracy per training-corpus combination.

    Subsets that cannot cover every function label (single-corpus rows,
    or any subset losing the only source of a label) fail to train by
    contract; their rows are reported as gaps rather than silently
    retrained with fewer classes.
    """
    taxonomy = taxonomy or default_taxonomy()
    names = list(test_sets)
    table = Table(title="Training-corpus combinations, Task function accuracy",
                  header=["dataset"] + names)
    for subset_name, members in subsets:
        train = [d for c in members for d in train_sets.get(c, [])]
        if not train:
            table.add(subset_name, *["--"] * len(names))
            continue
        try:
            model = _train_iso(train, BEST_ISO, train_cfg, emb, jobs,
                               taxonomy)
        except TrainingError as e:
            log.warning("subset %r not trainable: %s", subset_name, e)
            table.add(subset_name, *["--"] * len(names))
            continue
        row = []
        for name in names:
            preds, golds = _function_instances(
                model, test_sets[name], "TASK", None, _slogs_filter(name))
            row.append(_fmt(accuracy(preds, golds)) if golds else "--")
        table.add(subset_name, *row)
    return table


def prepare_all(config: ExperimentConfig, corpora: tuple[str, ...],
                mapped: bool = True) -> dict[str, list[UnifiedDialogue]]:
    taxonomy = default_taxonomy()
    sidecars = load_sidecars(config.sidecars) if config.sidecars else None
    out = {}
    for name in corpora:
        if name not in config.corpora:
            raise UsageError(
                f"experiment needs corpus {name} but no location is "
                "configured")
        out[name] = prepare(config.corpora[name], taxonomy, sidecars, mapped)
    return out


def reproduce_table(number: int, config: ExperimentConfig) -> Table:
    """Run the named end-to-end experiment and save its table files."""
    train_cfg = config.train_config()
    emb = config.embeddings()
    if number == 3:
        loc = config.corpora.get("SWDA")
        if loc is None:
            raise UsageError("the flat benchmark needs a SWDA location")
        sidecars = load_sidecars(config.sidecars) if config.sidecars else None
        dialogues = prepare(loc, default_taxonomy(), sidecars, mapped=False)
        train, dev, test = split_swda(dialogues, loc.split_file)
        table = run_flat_feature_study(train, dev, test, train_cfg, emb,
                                       config.jobs)
    elif number in (4, 5, 6):
        train_sets = prepare_all(config, TRAINING_CORPORA)
        if "SWDA" in train_sets and config.corpora["SWDA"].split_file:
            # only the training portion of SWDA feeds the aggregate model
            tr, _dev, _test = split_swda(train_sets["SWDA"],
                                         config.corpora["SWDA"].split_file)
            train_sets["SWDA"] = tr
        test_sets = prepare_all(config, TEST_CORPORA)
        test_named = {"DB": test_sets["DIALOGBANK"], "CAPC": test_sets["CAPC"],
                      "S-Logs": test_sets["SLOGS"]}
        train = [d for c in TRAINING_CORPORA for d in train_sets[c]]
        if number == 4:
            table = run_dimension_eval(train, test_named, train_cfg, emb,
                                       config.jobs)
        elif number == 5:
            table = run_function_feature_study(train, test_named, train_cfg,
                                               emb, config.jobs)
        else:
            table = run_ablation(train_sets_named(train_sets), test_named,
                                 train_cfg, emb, config.jobs)
    else:
        raise UsageError(f"no experiment reproduces table {number}")
    table.save(config.out_dir, f"table{number}")
    return table


def train_sets_named(train_sets: dict[str, list]) -> dict[str, list]:
    return {c: train_sets.get(c, []) for c in TRAINING_CORPORA}
