"""Maps corpus-native dialogue-act tags onto the taxonomy.

Rule tables are data files (one per corpus) so mappings can be extended
without code changes. A rule matches a source tag either exactly or by a
trailing-star prefix pattern; at most one rule may match any tag, which is
enforced when a table loads. Utterances none of whose tags reach a
taxonomy node are dropped, mirroring how the training resource was built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dialogues import DATag, UnifiedDialogue, UsageError, Utterance, reindex
from .preprocess import UnknownTagError, collapse_swda_tag
from .taxonomy import FUNCTION_LEVEL_FOR_DIMENSION, Taxonomy

DROP_TARGET = "DROP"

_QUALIFIER = re.compile(r"\s*\[[^\]]*\]\s*$")


class MappingError(Exception):
    """Bad rule table: overlap, unknown target, or missing table."""


@dataclass(frozen=True)
class MappingRule:
    corpus: str
    source_pattern: str  # exact tag, or prefix ending in "*"
    target: str  # taxonomy node id or DROP

    @property
    def is_prefix(self) -> bool:
        return self.source_pattern.endswith("*")

    @property
    def prefix(self) -> str:
        return self.source_pattern[:-1]

    def matches(self, tag: str) -> bool:
        if self.is_prefix:
            return tag.startswith(self.prefix)
        return tag == self.source_pattern


class MappingRuleSet:
    """All rules for one corpus, with overlap checked at construction."""

    def __init__(self, corpus: str, rules: list[MappingRule], taxonomy: Taxonomy):
        self.corpus = corpus
        self.exact: dict[str, MappingRule] = {}
        self.prefixes: list[MappingRule] = []
        for r in rules:
            if r.corpus != corpus:
                raise MappingError(
                    f"rule {r.source_pattern!r} is for {r.corpus}, not {corpus}")
            if r.target != DROP_TARGET and r.target not in taxonomy:
                raise MappingError(
                    f"{corpus} rule {r.source_pattern!r}: unknown target "
                    f"node {r.target!r}")
            if r.is_prefix:
                self.prefixes.append(r)
            else:
                if r.source_pattern in self.exact:
                    raise MappingError(
                        f"{corpus}: duplicate rule for {r.source_pattern!r}")
                self.exact[r.source_pattern] = r
        self._check_overlap()

    def _check_overlap(self):
        for p in self.prefixes:
            for tag in self.exact:
                if tag.startswith(p.prefix):
                    raise MappingError(
                        f"{self.corpus}: rules {p.source_pattern!r} and "
                        f"{tag!r} overlap")
            for q in self.prefixes:
                if p is not q and p.prefix.startswith(q.prefix):
                    raise MappingError(
                        f"{self.corpus}: rules {p.source_pattern!r} and "
                        f"{q.source_pattern!r} overlap")

    def lookup(self, tag: str) -> MappingRule | None:
        r = self.exact.get(tag)
        if r is not None:
            return r
        for p in self.prefixes:
            if p.matches(tag):
                return p
        return None


def parse_rules(text: str, origin: str) -> list[MappingRule]:
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MappingError(f"{origin}:{lineno}: expected 3 tab-separated "
                               f"fields, got {len(parts)}")
        rules.append(MappingRule(corpus=parts[0], source_pattern=parts[1],
                                 target=parts[2]))
    return rules


def load_rules(path: Path | str, corpus: str, taxonomy: Taxonomy) -> MappingRuleSet:
    path = Path(path)
    return MappingRuleSet(corpus, parse_rules(path.read_text("utf-8"), str(path)),
                          taxonomy)


def default_rules(corpus: str, taxonomy: Taxonomy) -> MappingRuleSet:
    name = f"rules/{corpus.lower()}.tsv"
    ref = resources.files("da_tagger.data") / name
    try:
        text = ref.read_text("utf-8")
    except FileNotFoundError:
        raise MappingError(f"no rule table for corpus {corpus}") from None
    return MappingRuleSet(corpus, parse_rules(text, name), taxonomy)


def match_key(corpus: str, tag: str) -> str:
    """Corpus-specific canonical form a tag takes before rule lookup.

    Switchboard raw compounds collapse to their 42-tag class;
    DialogBank tags lose trailing bracketed qualifiers.
    """
    if corpus == "SWDA":
        return collapse_swda_tag(tag)
    if corpus == "DIALOGBANK":
        return _QUALIFIER.sub("", tag)
    return tag


@dataclass
class MapOutcome:
    utterance: Utterance
    dropped: bool
    unmatched: list[str] = field(default_factory=list)
    explicit_drops: list[str] = field(default_factory=list)


def map_utterance(u: Utterance, rules: MappingRuleSet,
                  taxonomy: Taxonomy) -> MapOutcome:
    if not u.source_tags:
        raise UsageError(f"{u.utterance_id}: no source tags to map")
    tags: list[DATag] = []
    unmatched: list[str] = []
    explicit: list[str] = []
    for _scheme, raw in u.source_tags:
        try:
            key = match_key(rules.corpus, raw)
        except UnknownTagError:
            unmatched.append(raw)
            continue
        rule = rules.lookup(key)
        if rule is None:
            unmatched.append(raw)
        elif rule.target == DROP_TARGET:
            explicit.append(raw)
        else:
            t = DATag(dimension=taxonomy.dimension_of(rule.target),
                      node=rule.target)
            if t not in tags:
                tags.append(t)
    u.mapped_tags = tags
    return MapOutcome(utterance=u, dropped=not tags, unmatched=unmatched,
                      explicit_drops=explicit)


@dataclass
class DropReport:
    ingested: int = 0
    retained: int = 0
    drop_counts: dict[str, int] = field(default_factory=dict)

    @property
    def dropped(self) -> int:
        return self.ingested - self.retained

    @property
    def retained_pct(self) -> float:
        return 100.0 * self.retained / self.ingested if self.ingested else 0.0

    def note_drop(self, tags: list[str]):
        for t in tags:
            self.drop_counts[t] = self.drop_counts.get(t, 0) + 1


def map_corpus(dialogues: list[UnifiedDialogue], rules: MappingRuleSet,
               taxonomy: Taxonomy) -> tuple[list[UnifiedDialogue], DropReport]:
    """Map every utterance, removing the unmappable ones from the dialogues."""
    report = DropReport()
    for d in dialogues:
        kept = []
        for u in d.utterances:
            report.ingested += 1
            outcome = map_utterance(u, rules, taxonomy)
            if outcome.dropped:
                report.note_drop(outcome.unmatched + outcome.explicit_drops)
            else:
                report.retained += 1
                kept.append(u)
        d.utterances = kept
        reindex(d)
    return dialogues, report


@dataclass
class StatReport:
    """Per-category tag counts at one taxonomy level, split by corpus."""
    level: str
    rows: dict[str, dict[str, int]]  # corpus -> {label: count}
    corpus_utterances: dict[str, int]  # denominator: everything ingested

    def labels(self) -> list[str]:
        seen: dict[str, None] = {}
        for counts in self.rows.values():
            for label in counts:
                seen.setdefault(label)
        return list(seen)

    def total(self, corpus: str) -> int:
        return sum(self.rows.get(corpus, {}).values())

    def to_tsv(self) -> str:
        corpora = sorted(self.rows)
        lines = ["\t".join(["label"] + corpora)]
        for label in self.labels():
            lines.append("\t".join(
                [label] + [str(self.rows[c].get(label, 0)) for c in corpora]))
        lines.append("\t".join(
            ["total"] + [str(self.total(c)) for c in corpora]))
        lines.append("\t".join(
            ["pct_of_corpus"] + [
                f"{100.0 * self.total(c) / self.corpus_utterances[c]:.1f}"
                if self.corpus_utterances.get(c) else "0.0"
                for c in corpora]))
        return "\n".join(lines) + "\n"


def corpus_stats(dialogues: list[UnifiedDialogue], level: str,
                 taxonomy: Taxonomy) -> StatReport:
    if level not in FUNCTION_LEVEL_FOR_DIMENSION.values() and level != "dimension":
        raise UsageError(f"unknown stats level {level!r}")
    any_mapped = False
    rows: dict[str, dict[str, int]] = {}
    denom: dict[str, int] = {}
    label_order = (["TASK", "SOM", "FEEDBACK"] if level == "dimension"
                   else taxonomy.classifier_labels(level))
    for d in dialogues:
        counts = rows.setdefault(d.corpus, {})
        denom[d.corpus] = denom.get(d.corpus, 0) + int(
            d.metadata.get("utterances_ingested", len(d.utterances)))
        for u in d.utterances:
            if u.mapped_tags is None:
                continue
            any_mapped = True
            if level == "dimension":
                cats = {t.dimension for t in u.mapped_tags}
            else:
                cats = {t.node for t in u.mapped_tags
                        if taxonomy.node(t.node).is_classifier_label(level)}
            for c in cats:
                counts[c] = counts.get(c, 0) + 1
    if not any_mapped:
        raise UsageError("no mapped tags present; run the mapping stage first")
    ordered: dict[str, dict[str, int]] = {}
    for corpus, counts in rows.items():
        ordered[corpus] = {lb: counts[lb] for lb in label_order if lb in counts}
        for lb in counts:
            if lb not in ordered[corpus]:
                ordered[corpus][lb] = counts[lb]
    return StatReport(level=level, rows=ordered, corpus_utterances=denom)
