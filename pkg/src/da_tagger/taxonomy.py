"""The dialogue-act taxonomy: an ISO 24617-2 subset over three dimensions.

The tree covers the Task (general-purpose) dimension down to six
communicative-function leaves, Social Obligations Management with three, and
Feedback as a single undifferentiated label. Internal nodes (Question,
InfoProviding, ...) exist so corpus tags that only identify a coarser
category can still be mapped and counted at dimension level.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

DIMENSIONS = ("TASK", "SOM", "FEEDBACK")
LEVELS = ("dimension", "task_function", "som_function", "feedback")

# Canonical label sets the experiment drivers expect.
TASK_FUNCTIONS = ("Inform", "PropQ", "SetQ", "ChoiceQ", "Commissive", "Directive")
SOM_FUNCTIONS = ("Salutation", "Apology", "Thanking")
FEEDBACK_LABEL = "Feedback"

FUNCTION_LEVEL_FOR_DIMENSION = {"TASK": "task_function", "SOM": "som_function",
                                "FEEDBACK": "feedback"}


class TaxonomyError(Exception):
    """Structural problem in a taxonomy file (names the offending node)."""


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    dimension: str
    parent: str | None
    levels: frozenset[str]

    def is_classifier_label(self, level: str) -> bool:
        return level in self.levels


class Taxonomy:
    def __init__(self, nodes: list[TaxonomyNode]):
        self.nodes: dict[str, TaxonomyNode] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise TaxonomyError(f"duplicate node id {n.id!r}")
            self.nodes[n.id] = n
        self._order = [n.id for n in nodes]
        self._validate()

    def _validate(self):
        for n in self.nodes.values():
            if n.dimension not in DIMENSIONS:
                raise TaxonomyError(f"node {n.id!r}: unknown dimension {n.dimension!r}")
            for lv in n.levels:
                if lv not in LEVELS:
                    raise TaxonomyError(f"node {n.id!r}: unknown level {lv!r}")
            if n.parent is not None:
                parent = self.nodes.get(n.parent)
                if parent is None:
                    raise TaxonomyError(f"node {n.id!r}: missing parent {n.parent!r}")
                if parent.dimension != n.dimension:
                    raise TaxonomyError(
                        f"node {n.id!r}: dimension {n.dimension} differs from "
                        f"parent {n.parent!r} ({parent.dimension})")
        # Cycle check: every node must reach a root.
        for n in self.nodes.values():
            seen = set()
            cur = n
            while cur.parent is not None:
                if cur.id in seen:
                    raise TaxonomyError(f"cycle through node {n.id!r}")
                seen.add(cur.id)
                cur = self.nodes[cur.parent]
        roots = {}
        for nid in self._order:
            n = self.nodes[nid]
            if n.parent is None:
                roots.setdefault(n.dimension, []).append(nid)
        for dim, rs in roots.items():
            if len(rs) > 1:
                raise TaxonomyError(
                    f"dimension {dim} has multiple roots: {', '.join(rs)}")

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def node(self, node_id: str) -> TaxonomyNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise TaxonomyError(f"unknown taxonomy node {node_id!r}") from None

    def dimension_of(self, node_id: str) -> str:
        return self.node(node_id).dimension

    def classifier_labels(self, level: str) -> list[str]:
        """Node ids usable as classes at the given level, in file order."""
        if level not in LEVELS:
            raise TaxonomyError(f"unknown level {level!r}")
        return [nid for nid in self._order
                if self.nodes[nid].is_classifier_label(level)]

    def dimension_nodes(self, dimension: str) -> list[str]:
        return [nid for nid in self._order
                if self.nodes[nid].dimension == dimension]

    def missing_labels(self, level: str, expected: tuple[str, ...]) -> list[str]:
        """Expected classifier labels absent at a level (for pre-train checks)."""
        have = set(self.classifier_labels(level))
        return [x for x in expected if x not in have]

    def to_tsv(self) -> str:
        lines = []
        for nid in self._order:
            n = self.nodes[nid]
            levels = ",".join(sorted(n.levels)) if n.levels else "-"
            lines.append(f"{nid}\t{n.dimension}\t{n.parent or '-'}\t{levels}")
        return "\n".join(lines) + "\n"


def _parse(text: str, origin: str) -> Taxonomy:
    nodes = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise TaxonomyError(f"{origin}:{lineno}: expected 4 tab-separated "
                                f"fields, got {len(parts)}")
        nid, dim, parent, levels = parts
        if nid == parent:
            raise TaxonomyError(f"{origin}:{lineno}: node {nid!r} is its own parent")
        nodes.append(TaxonomyNode(
            id=nid, dimension=dim,
            parent=None if parent == "-" else parent,
            levels=frozenset() if levels == "-" else frozenset(levels.split(","))))
    return Taxonomy(nodes)


def load_taxonomy(path: Path | str) -> Taxonomy:
    path = Path(path)
    return _parse(path.read_text(encoding="utf-8"), str(path))


def default_taxonomy() -> Taxonomy:
    text = (resources.files("da_tagger.data") / "taxonomy.tsv").read_text("utf-8")
    return _parse(text, "<default taxonomy>")
