"""Hazard aspect taxonomy and assessment rubrics.

Aspects form a forest rooted at four fixed top-tier nodes (Capability,
Domain Knowledge, Affordance, Impact Domain). Tiers TL0 through TL2 ship
with the package; TL3 and TL4 are open for user extension through custom
taxonomy documents.
"""
from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union


class TaxonomyError(ValueError):
    """Raised when a taxonomy or rubric document violates its invariants."""


class TaxonomyLevel(enum.IntEnum):
    TL0 = 0
    TL1 = 1
    TL2 = 2
    TL3 = 3
    TL4 = 4


REQUIRED_ROOT_LABELS = ("Capability", "Domain Knowledge", "Affordance", "Impact Domain")


def normalize_label(label: str) -> str:
    """Collapse whitespace and case for label comparison."""
    return re.sub(r"\s+", " ", label.strip()).lower()


def slugify(label: str) -> str:
    s = label.lower().replace("&", "and")
    return re.sub(r"[^a-z0-9]+", "-", s).strip("-")


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    level: TaxonomyLevel
    label: str
    parent: Optional[str] = None
    description: Optional[str] = None


@dataclass(frozen=True)
class Taxonomy:
    """Validated aspect forest with document-order node listing."""

    version: str
    nodes: tuple[TaxonomyNode, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, TaxonomyNode] = {}
        children: dict[Optional[str], list[str]] = {}
        for node in self.nodes:
            if node.id in by_id:
                raise TaxonomyError(f"duplicate node id: {node.id}")
            by_id[node.id] = node
            children.setdefault(node.parent, []).append(node.id)
        for node in self.nodes:
            if node.level == TaxonomyLevel.TL0:
                if node.parent is not None:
                    raise TaxonomyError(f"root node {node.id} must not have a parent")
                continue
            if node.parent is None:
                raise TaxonomyError(f"node {node.id} at TL{int(node.level)} needs a parent")
            parent = by_id.get(node.parent)
            if parent is None:
                raise TaxonomyError(f"node {node.id} references unknown parent {node.parent}")
            if parent.level != node.level - 1:
                raise TaxonomyError(
                    f"node {node.id} at TL{int(node.level)} cannot attach to "
                    f"{parent.id} at TL{int(parent.level)}"
                )
        roots = [by_id[i] for i in children.get(None, [])]
        root_labels = sorted(normalize_label(r.label) for r in roots)
        if root_labels != sorted(normalize_label(l) for l in REQUIRED_ROOT_LABELS):
            raise TaxonomyError(
                "taxonomy must have exactly four roots: " + ", ".join(REQUIRED_ROOT_LABELS)
            )
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_children", children)

    def node(self, node_id: str) -> TaxonomyNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise TaxonomyError(f"unknown aspect id: {node_id}") from None

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._by_id

    def roots(self) -> list[TaxonomyNode]:
        return [self._by_id[i] for i in self._children.get(None, [])]

    def ancestors(self, node_id: str) -> list[TaxonomyNode]:
        """Chain from the given node up to its root, inclusive."""
        chain = [self.node(node_id)]
        while chain[-1].parent is not None:
            chain.append(self.node(chain[-1].parent))
        return chain

    def ancestor_at(self, node_id: str, level: TaxonomyLevel) -> TaxonomyNode:
        for node in self.ancestors(node_id):
            if node.level == level:
                return node
        raise TaxonomyError(f"aspect {node_id} has no ancestor at TL{int(level)}")

    def at_level(self, level: TaxonomyLevel) -> list[TaxonomyNode]:
        return [n for n in self.nodes if n.level == level]


def children(taxonomy: Taxonomy, node_id: str) -> list[TaxonomyNode]:
    """Direct children of a node in document order."""
    taxonomy.node(node_id)
    return [taxonomy.node(i) for i in taxonomy._children.get(node_id, [])]


def resolve_path(taxonomy: Taxonomy, labels: Sequence[str]) -> TaxonomyNode:
    """Resolve a root-to-node label path, ignoring case and surrounding space."""
    if not labels:
        raise TaxonomyError("empty label path")
    scope: Optional[str] = None
    node: Optional[TaxonomyNode] = None
    for depth, raw in enumerate(labels):
        wanted = normalize_label(raw)
        pool = taxonomy.roots() if scope is None else children(taxonomy, scope)
        matches = [n for n in pool if normalize_label(n.label) == wanted]
        if not matches:
            raise TaxonomyError(
                f"no aspect labelled {raw!r} at position {depth + 1} of path {list(labels)!r}"
            )
        if len(matches) > 1:
            ids = ", ".join(n.id for n in matches)
            raise TaxonomyError(f"label {raw!r} is ambiguous between: {ids}")
        node = matches[0]
        scope = node.id
    assert node is not None
    return node


def load_taxonomy(source: Union[str, Path, bytes, Mapping]) -> Taxonomy:
    """Parse and validate a taxonomy document from a path, JSON text, or mapping."""
    doc = _read_document(source, "taxonomy")
    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise TaxonomyError("taxonomy document needs a string 'version'")
    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list):
        raise TaxonomyError("taxonomy document needs a 'nodes' list")
    nodes = []
    for i, raw in enumerate(raw_nodes):
        if not isinstance(raw, Mapping):
            raise TaxonomyError(f"node {i} is not an object")
        try:
            level = TaxonomyLevel(raw["level"])
        except (KeyError, ValueError):
            raise TaxonomyError(f"node {i} has a missing or invalid level") from None
        node_id = raw.get("id")
        label = raw.get("label")
        if not isinstance(node_id, str) or not node_id:
            raise TaxonomyError(f"node {i} has a missing or invalid id")
        if not isinstance(label, str) or not label.strip():
            raise TaxonomyError(f"node {node_id} has an empty label")
        nodes.append(TaxonomyNode(
            id=node_id,
            level=level,
            label=label,
            parent=raw.get("parent"),
            description=raw.get("description"),
        ))
    return Taxonomy(version=version, nodes=tuple(nodes))


def taxonomy_to_dict(taxonomy: Taxonomy) -> dict:
    return {
        "version": taxonomy.version,
        "nodes": [
            {
                "id": n.id,
                "level": int(n.level),
                "label": n.label,
                "parent": n.parent,
                "description": n.description,
            }
            for n in taxonomy.nodes
        ],
    }


class RubricKind(enum.Enum):
    CAPABILITY_LEVEL = "capability_level"
    DOMAIN_KNOWLEDGE_LEVEL = "domain_knowledge_level"
    PLAUSIBLE_QUALIFIER = "plausible_qualifier"


class HazardMode(enum.Enum):
    """Whether a hazard stems from the system doing well or doing poorly."""

    COMPETENCE = "competence"
    INCOMPETENCE = "incompetence"
    COMBINED = "combined"


_RUBRIC_INDEX_RANGE = {
    RubricKind.CAPABILITY_LEVEL: range(1, 10),
    RubricKind.DOMAIN_KNOWLEDGE_LEVEL: range(1, 10),
    RubricKind.PLAUSIBLE_QUALIFIER: range(1, 7),
}


@dataclass(frozen=True)
class RubricEntry:
    kind: RubricKind
    aspect_ref: str
    index: int
    text: str
    mode: Optional[HazardMode] = None

    def __post_init__(self) -> None:
        if self.index not in _RUBRIC_INDEX_RANGE[self.kind]:
            span = _RUBRIC_INDEX_RANGE[self.kind]
            raise TaxonomyError(
                f"{self.kind.value} index must be in [{span.start}, {span.stop - 1}], "
                f"got {self.index}"
            )
        if self.kind == RubricKind.PLAUSIBLE_QUALIFIER:
            if self.mode not in (HazardMode.COMPETENCE, HazardMode.INCOMPETENCE):
                raise TaxonomyError("plausible qualifiers need a competence or incompetence mode")
        elif self.mode is not None:
            raise TaxonomyError(f"{self.kind.value} entries do not take a mode")
        if not self.text.strip():
            raise TaxonomyError("rubric text must be non-empty")


@dataclass(frozen=True)
class RubricSet:
    version: str
    entries: tuple[RubricEntry, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[tuple, RubricEntry] = {}
        for entry in self.entries:
            key = (entry.kind, entry.aspect_ref, entry.index, entry.mode)
            if key in index:
                raise TaxonomyError(
                    f"duplicate rubric entry for {entry.aspect_ref} "
                    f"({entry.kind.value} {entry.index})"
                )
            index[key] = entry
        object.__setattr__(self, "_index", index)


def rubric_lookup(
    rubrics: RubricSet,
    kind: RubricKind,
    aspect_ref: str,
    index: int,
    mode: Optional[HazardMode] = None,
) -> RubricEntry:
    """Fetch one rubric cell; missing cells raise with the full key named."""
    span = _RUBRIC_INDEX_RANGE[kind]
    if index not in span:
        raise TaxonomyError(
            f"{kind.value} index must be in [{span.start}, {span.stop - 1}], got {index}"
        )
    if kind == RubricKind.PLAUSIBLE_QUALIFIER and mode is None:
        raise TaxonomyError("plausible qualifier lookup needs a mode")
    entry = rubrics._index.get((kind, aspect_ref, index, mode))
    if entry is None:
        mode_part = f" mode={mode.value}" if mode else ""
        raise TaxonomyError(
            f"no rubric entry for {kind.value} aspect={aspect_ref} index={index}{mode_part}"
        )
    return entry


def load_rubrics(source: Union[str, Path, bytes, Mapping]) -> RubricSet:
    doc = _read_document(source, "rubric")
    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise TaxonomyError("rubric document needs a string 'version'")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list):
        raise TaxonomyError("rubric document needs an 'entries' list")
    entries = []
    for i, raw in enumerate(raw_entries):
        try:
            kind = RubricKind(raw["kind"])
        except (KeyError, ValueError, TypeError):
            raise TaxonomyError(f"rubric entry {i} has a missing or invalid kind") from None
        mode_raw = raw.get("mode")
        mode = HazardMode(mode_raw) if mode_raw is not None else None
        try:
            entries.append(RubricEntry(
                kind=kind,
                aspect_ref=raw["aspect_ref"],
                index=int(raw["index"]),
                text=raw["text"],
                mode=mode,
            ))
        except KeyError as exc:
            raise TaxonomyError(f"rubric entry {i} is missing field {exc}") from None
    return RubricSet(version=version, entries=tuple(entries))


def rubrics_to_dict(rubrics: RubricSet) -> dict:
    return {
        "version": rubrics.version,
        "entries": [
            {
                "kind": e.kind.value,
                "aspect_ref": e.aspect_ref,
                "index": e.index,
                "mode": e.mode.value if e.mode else None,
                "text": e.text,
            }
            for e in rubrics.entries
        ],
    }


def bundled_taxonomy() -> Taxonomy:
    """The taxonomy dataset shipped with the package (TL0 through TL2)."""
    data = resources.files("pra_workbench.data").joinpath("taxonomy.json").read_text("utf-8")
    return load_taxonomy(data)


def bundled_rubrics() -> RubricSet:
    data = resources.files("pra_workbench.data").joinpath("rubrics.json").read_text("utf-8")
    return load_rubrics(data)


def _read_document(source: Union[str, Path, bytes, Mapping], what: str) -> Mapping:
    if isinstance(source, Mapping):
        return source
    if isinstance(source, Path):
        text = source.read_text("utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        stripped = source.lstrip()
        if stripped.startswith("{"):
            text = source
        else:
            text = Path(source).read_text("utf-8")
    else:
        raise TaxonomyError(f"cannot read a {what} document from {type(source).__name__}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(f"malformed {what} document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise TaxonomyError(f"{what} document must be a JSON object")
    return doc
