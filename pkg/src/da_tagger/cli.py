"""Command-line entry point.

One binary, ``da``, exposing the pipeline as subcommands: ingest, map,
stats, preprocess, annotate-check, train, tune, tag, eval, ablate, and
reproduce-table. Exit codes: 0 success, 1 usage error, 2 data/format
error, 3 integrity (count-mismatch) error. Logs go to standard error;
artifacts to the paths given by flags. Outputs are byte-identical across
reruns with the same inputs, flags, and seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import experiments
from .dialogues import (CorpusManifest, DataFormatError, IntegrityError,
                        UsageError, read_dialogues, write_dialogues)
from .evaluation import evaluate
from .features import (FeatureConfig, attach_annotations, extract,
                       gold_prev_tag, load_embeddings)
from .mapping import corpus_stats, default_rules, load_rules, map_corpus
from .preprocess import UnknownTagError, drop_empty, normalize_corpus
from .svm import DEFAULT_C_GRID, TrainConfig, TrainingError, tune_C
from .tagger import (GOLD_PREV, ISO_SUBSET, PREDICTED_PREV, SWDA42,
                     evaluate_dimensions, evaluate_functions_gold_dims,
                     load_tagger, save_tagger, swda42_label, tag,
                     train_tagger)
from .taxonomy import default_taxonomy

log = logging.getLogger("da")

_FEATURE_TOKENS = {
    "uni": "use_unigrams", "bi": "use_bigrams", "tri": "use_trigrams",
    "prev": "use_prev_da", "pos": "use_pos", "ipos": "use_ipos",
    "dep": "use_dep", "idep": "use_idep", "we": "use_embeddings",
}


def parse_features(spec: str, emb_dim: int = 0) -> FeatureConfig:
    """Comma-separated feature tokens, e.g. ``uni,bi,prev,ipos``."""
    kwargs = {}
    for token in spec.split(","):
        token = token.strip().lower()
        if not token:
            continue
        if token not in _FEATURE_TOKENS:
            raise UsageError(
                f"unknown feature {token!r}; choose from "
                f"{', '.join(sorted(_FEATURE_TOKENS))}")
        kwargs[_FEATURE_TOKENS[token]] = True
    if kwargs.get("use_embeddings"):
        if emb_dim <= 0:
            raise UsageError("feature 'we' needs --emb-dim")
        kwargs["embedding_dim"] = emb_dim
    return FeatureConfig(**kwargs)


class _Parser(argparse.ArgumentParser):
    """argparse reports bad flags with exit code 2; this binary uses 1."""

    def error(self, message):
        raise UsageError(message)


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallelism degree (default: available cores)")


def _add_emb(p):
    p.add_argument("--emb", type=Path, help="word-embedding text file")
    p.add_argument("--emb-dim", type=int, default=0,
                   help="embedding dimensionality")


def _load_emb(args):
    if args.emb is None:
        return None
    if args.emb_dim <= 0:
        raise UsageError("--emb needs --emb-dim")
    return load_embeddings(args.emb, args.emb_dim)


def _data_root(corpus: str, given: Optional[Path]) -> Path:
    if given is not None:
        return given
    base = os.environ.get("DA_DATA_ROOT")
    if base:
        return Path(base) / corpus.lower()
    raise UsageError(
        f"no root for {corpus}: pass --root or set DA_DATA_ROOT")


def build_parser() -> _Parser:
    p = _Parser(prog="da", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    sp = sub.add_parser("ingest", parents=[], help="read a corpus release "
                        "into the unified dialogue format")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--root", type=Path)
    sp.add_argument("--glob", action="append", default=[],
                    help="file glob under the root (repeatable)")
    sp.add_argument("--manifest", type=Path,
                    help="manifest with globs and expected counts")
    sp.add_argument("--out", type=Path, required=True)

    sp = sub.add_parser("preprocess", help="normalize utterance text and "
                        "drop empty utterances")
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--keep-empty", action="store_true",
                    help="keep utterances that normalize to nothing")

    sp = sub.add_parser("map", help="apply schema-mapping rules; drops "
                        "unmapped utterances and reports counts")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--rules", type=Path, help="rule table override")
    sp.add_argument("--report", type=Path, help="drop-report JSON path")

    sp = sub.add_parser("stats", help="label distribution at a "
                        "classification level")
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--level", required=True,
                    choices=["dimension", "task_function", "som_function",
                             "feedback"])
    sp.add_argument("--out", type=Path)

    sp = sub.add_parser("annotate-check", help="verify syntactic sidecar "
                        "alignment against normalized tokens")
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--sidecar", type=Path, action="append", required=True)

    sp = sub.add_parser("train", help="train a tagger and save a model "
                        "bundle directory")
    sp.add_argument("--mode", required=True, choices=["flat", "iso"])
    sp.add_argument("--train", dest="train_files", type=Path, action="append",
                    required=True, help="unified dialogue file (repeatable)")
    sp.add_argument("--features", default="uni,bi",
                    help="comma list of " + ",".join(sorted(_FEATURE_TOKENS)))
    sp.add_argument("--C", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sidecar", type=Path, action="append", default=[])
    sp.add_argument("--out", type=Path, required=True)
    _add_emb(sp)
    _add_jobs(sp)

    sp = sub.add_parser("tune", help="grid-search C on a development set "
                        "(flat benchmark head)")
    sp.add_argument("--train", dest="train_files", type=Path, action="append",
                    required=True)
    sp.add_argument("--dev", dest="dev_files", type=Path, action="append",
                    required=True)
    sp.add_argument("--features", default="uni,bi,prev")
    sp.add_argument("--grid", default=",".join(str(c) for c in DEFAULT_C_GRID))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sidecar", type=Path, action="append", default=[])
    _add_emb(sp)
    _add_jobs(sp)

    sp = sub.add_parser("tag", help="tag dialogues with a trained model")
    sp.add_argument("--model", type=Path, required=True)
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--context", default=PREDICTED_PREV,
                    choices=[GOLD_PREV, PREDICTED_PREV])
    sp.add_argument("--sidecar", type=Path, action="append", default=[])
    _add_emb(sp)

    sp = sub.add_parser("eval", help="score a trained model against gold "
                        "annotations")
    sp.add_argument("--model", type=Path, required=True)
    sp.add_argument("--in", dest="inp", type=Path, required=True)
    sp.add_argument("--context", default=GOLD_PREV,
                    choices=[GOLD_PREV, PREDICTED_PREV])
    sp.add_argument("--sidecar", type=Path, action="append", default=[])
    sp.add_argument("--out", type=Path)
    _add_emb(sp)

    for name, help_text in (
            ("reproduce-table", "run a named end-to-end experiment"),
            ("ablate", "run the training-corpus ablation study")):
        sp = sub.add_parser(name, help=help_text)
        if name == "reproduce-table":
            sp.add_argument("number", type=int, choices=[3, 4, 5, 6])
        sp.add_argument("--config", type=Path,
                        help="experiment config JSON")
        for corpus in experiments.TRAINING_CORPORA + experiments.TEST_CORPORA:
            sp.add_argument(f"--{corpus.lower()}", type=Path, dest=corpus,
                            help=f"{corpus} corpus root")
        sp.add_argument("--split", type=Path, help="SWDA split file")
        sp.add_argument("--sidecar", type=Path, action="append", default=[])
        sp.add_argument("--C", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", type=Path)
        _add_emb(sp)
        _add_jobs(sp)
    return p


def _read_many(paths) -> list:
    out = []
    for p in paths:
        out.extend(read_dialogues(p))
    return out


def _attach(dialogues, sidecar_paths):
    if sidecar_paths:
        merged = experiments.load_sidecars(list(sidecar_paths))
        return attach_annotations(dialogues, merged)
    return None


def _cmd_ingest(args) -> int:
    corpus = args.corpus.upper()
    root = _data_root(corpus, args.root)
    if args.manifest:
        manifest = CorpusManifest.load(args.manifest)
    else:
        manifest = CorpusManifest(
            corpus=corpus,
            file_globs=args.glob or experiments.DEFAULT_GLOBS.get(corpus, []))
    if not manifest.file_globs:
        raise UsageError(f"no file globs known for corpus {corpus}")
    from .corpora import read_corpus
    dialogues = read_corpus(manifest, root)
    write_dialogues(dialogues, args.out)
    log.info("ingested %d dialogues from %s", len(dialogues), root)
    return 0


def _cmd_preprocess(args) -> int:
    dialogues = read_dialogues(args.inp)
    normalize_corpus(dialogues)
    if not args.keep_empty:
        dialogues, n_dropped = drop_empty(dialogues)
        log.info("dropped %d empty utterances", n_dropped)
    write_dialogues(dialogues, args.out)
    return 0


def _cmd_map(args) -> int:
    corpus = args.corpus.upper()
    taxonomy = default_taxonomy()
    if args.rules:
        rules = load_rules(args.rules, corpus, taxonomy)
    else:
        rules = default_rules(corpus, taxonomy)
    dialogues = read_dialogues(args.inp)
    dialogues, report = map_corpus(dialogues, rules, taxonomy)
    write_dialogues(dialogues, args.out)
    doc = {"ingested": report.ingested, "retained": report.retained,
           "dropped": report.dropped, "drop_counts": report.drop_counts}
    if args.report:
        args.report.write_text(json.dumps(doc, indent=2) + "\n",
                               encoding="utf-8")
    log.info("mapped %d/%d utterances", report.retained, report.ingested)
    return 0


def _cmd_stats(args) -> int:
    dialogues = read_dialogues(args.inp)
    report = corpus_stats(dialogues, args.level, default_taxonomy())
    text = report.to_tsv()
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_annotate_check(args) -> int:
    dialogues = read_dialogues(args.inp)
    report = _attach(dialogues, args.sidecar)
    sys.stdout.write(
        f"attached\t{report.attached}\nmissing\t{len(report.missing)}\n"
        f"mismatched\t{len(report.mismatched)}\ntotal\t{report.total}\n")
    if report.mismatched:
        raise IntegrityError(
            f"{len(report.mismatched)} utterances have sidecar tokens that "
            f"do not align with normalized text: "
            f"{', '.join(report.mismatched[:5])}")
    return 0


def _cmd_train(args) -> int:
    cfg = parse_features(args.features, args.emb_dim)
    emb = _load_emb(args) if cfg.use_embeddings else None
    dialogues = _read_many(args.train_files)
    _attach(dialogues, args.sidecar)
    mode = SWDA42 if args.mode == "flat" else ISO_SUBSET
    model = train_tagger(dialogues, cfg,
                         TrainConfig(C=args.C, seed=args.seed), mode,
                         emb=emb, n_jobs=args.jobs)
    save_tagger(model, args.out)
    log.info("saved %s model to %s", args.mode, args.out)
    return 0


def _cmd_tune(args) -> int:
    cfg = parse_features(args.features, args.emb_dim)
    emb = _load_emb(args) if cfg.use_embeddings else None
    train = _read_many(args.train_files)
    dev = _read_many(args.dev_files)
    _attach(train, args.sidecar)
    _attach(dev, args.sidecar)
    from .features import build_vocabulary
    vocab = build_vocabulary(train, cfg, prev_labeler=swda42_label)

    def fvs(dialogues):
        out = []
        for d in dialogues:
            prev = None
            for u in d.utterances:
                out.append((extract(u, prev, cfg, vocab, emb, strict=False),
                            swda42_label(u)))
                prev = swda42_label(u)
        return out

    grid = [float(c) for c in args.grid.split(",") if c.strip()]
    best, accs = tune_C(fvs(train), fvs(dev), grid=grid,
                        cfg=TrainConfig(seed=args.seed),
                        n_sparse=len(vocab), n_jobs=args.jobs)
    for c in grid:
        sys.stdout.write(f"{c:g}\t{accs[c]:.4f}\n")
    sys.stdout.write(f"best\t{best:g}\n")
    return 0


def _cmd_tag(args) -> int:
    model = load_tagger(args.model)
    emb = _load_emb(args) if model.feature_config.use_embeddings else None
    dialogues = read_dialogues(args.inp)
    _attach(dialogues, args.sidecar)
    with open(args.out, "w", encoding="utf-8") as fh:
        for d in dialogues:
            tagged = tag(model, d, context=args.context, emb=emb)
            doc = {"dialogue_id": d.dialogue_id,
                   "utterances": [t.to_json() for t in tagged]}
            fh.write(json.dumps(doc, ensure_ascii=False,
                                separators=(",", ":")) + "\n")
    return 0


def _cmd_eval(args) -> int:
    model = load_tagger(args.model)
    emb = _load_emb(args) if model.feature_config.use_embeddings else None
    dialogues = read_dialogues(args.inp)
    _attach(dialogues, args.sidecar)
    if model.mode == SWDA42:
        preds, golds = [], []
        for d in dialogues:
            for t in tag(model, d, context=args.context, emb=emb):
                preds.append(t.flat_tag)
                golds.append(swda42_label(t.utterance))
        doc = evaluate(preds, golds).to_json()
    else:
        dims = evaluate_dimensions(model, dialogues, context=args.context,
                                   emb=emb)
        doc = {"dimensions": dims.accuracy,
               "gold_positives": dims.gold_positives,
               "overall_micro": dims.overall_micro,
               "overall_macro": dims.overall_macro,
               "overall_joint": dims.overall_joint}
        if args.context == GOLD_PREV:
            doc["functions_gold_dims"] = evaluate_functions_gold_dims(
                model, dialogues, emb=emb)
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _experiment_config(args) -> experiments.ExperimentConfig:
    overrides = {}
    if args.config:
        cfg = experiments.ExperimentConfig.load(args.config, overrides)
    else:
        cfg = experiments.ExperimentConfig(corpora={})
    for corpus in experiments.TRAINING_CORPORA + experiments.TEST_CORPORA:
        root = getattr(args, corpus, None)
        if root is None and corpus not in cfg.corpora:
            env = os.environ.get("DA_DATA_ROOT")
            if env and (Path(env) / corpus.lower()).is_dir():
                root = Path(env) / corpus.lower()
        if root is not None:
            cfg.corpora[corpus] = experiments.CorpusLocation(
                corpus=corpus, root=root,
                globs=experiments.DEFAULT_GLOBS[corpus])
    if args.split and "SWDA" in cfg.corpora:
        cfg.corpora["SWDA"].split_file = args.split
    if args.sidecar:
        cfg.sidecars = list(args.sidecar)
    if args.emb is not None:
        cfg.embeddings_path = args.emb
        cfg.embedding_dim = args.emb_dim
    if args.C is not None:
        cfg.C = args.C
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    cfg.jobs = args.jobs
    return cfg


def _cmd_reproduce(args) -> int:
    number = getattr(args, "number", 6)
    cfg = _experiment_config(args)
    table = experiments.reproduce_table(number, cfg)
    sys.stdout.write(table.to_text())
    log.info("wrote table%d files under %s", number, cfg.out_dir)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "map": _cmd_map,
    "stats": _cmd_stats,
    "annotate-check": _cmd_annotate_check,
    "train": _cmd_train,
    "tune": _cmd_tune,
    "tag": _cmd_tag,
    "eval": _cmd_eval,
    "reproduce-table": _cmd_reproduce,
    "ablate": _cmd_reproduce,
}


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.subcommand](args)
    except (UsageError, TrainingError) as e:
        log.error("usage: %s", e)
        return 1
    except (DataFormatError, UnknownTagError) as e:
        log.error("data format: %s", e)
        return 2
    except IntegrityError as e:
        log.error("integrity: %s", e)
        return 3


def entry():
    raise SystemExit(main())
