"""Three-layer knowledge base: class taxonomy, culture- and person-specific
instances, and the auxiliary dictionaries (synonyms, entity-type map,
category map).

The store is a plain JSON document; the full schema is documented in
``load_ontology``. Mutations are serialized by the owner of the
:class:`Ontology` value (single-writer, multi-reader); every successful
mutation bumps ``revision`` so readers can detect staleness.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import (
    DuplicateConceptError,
    EmptySentenceError,
    OntologyIntegrityError,
    OntologyParseError,
    UnknownClassError,
)
from .text import fold

ROOT_NAME = "Topic"

LAYERS = ("CS", "PS")

LIKELINESS_SCALE = {
    "VeryLow": 0.1,
    "Low": 0.3,
    "Medium": 0.5,
    "High": 0.7,
    "VeryHigh": 0.9,
}

TEMPLATE_KINDS = ("positive-assertion", "negative-assertion", "question")

_VAR_RE = re.compile(r"\$\w+")


@dataclass(frozen=True)
class LikelinessValue:
    """Five-level attitude scale with a fixed numeric map."""

    label: str

    def __post_init__(self):
        if self.label not in LIKELINESS_SCALE:
            raise ValueError(f"unknown likeliness label {self.label!r}")

    @property
    def numeric(self) -> float:
        return LIKELINESS_SCALE[self.label]


@dataclass(frozen=True)
class SentenceTemplate:
    """Composable sentence chunk; ``$hasName`` is the only variable."""

    id: str
    kind: str
    text: str

    def __post_init__(self):
        if self.kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}")
        if not self.text:
            raise ValueError("template text must be nonempty")
        for marker in _VAR_RE.findall(self.text):
            if marker != "$hasName":
                raise ValueError(f"unsupported template variable {marker!r}")


@dataclass
class OntologyClass:
    name: str
    display_name: str
    parent: str | None = None  # absent only for the root
    keywords: list[str] = field(default_factory=list)
    entity_type: str | None = None
    categories: list[str] = field(default_factory=list)
    templates: list[str] = field(default_factory=list)  # template ids


@dataclass
class Instance:
    id: str
    class_name: str
    layer: str  # CS | PS
    culture: str | None = None  # required iff layer == CS
    user: str | None = None  # required iff layer == PS
    sentences: list[str] = field(default_factory=list)
    likeliness: LikelinessValue = field(default_factory=lambda: LikelinessValue("Medium"))
    topic_links: list[str] = field(default_factory=list)

    @property
    def owner(self) -> str:
        return self.culture if self.layer == "CS" else (self.user or "")


class SynonymDictionary:
    """Symmetric-closed word -> synonyms map, keys lemmatized and lowercase."""

    def __init__(self, entries: dict[str, list[str]] | None = None):
        self._entries: dict[str, set[str]] = {}
        for word, syns in (entries or {}).items():
            for syn in syns:
                self.add(word, syn)

    def add(self, a: str, b: str) -> None:
        a, b = fold(a), fold(b)
        if a == b or not a or not b:
            return
        self._entries.setdefault(a, set()).add(b)
        self._entries.setdefault(b, set()).add(a)

    def lookup(self, word: str) -> list[str]:
        return sorted(self._entries.get(fold(word), ()))

    def as_dict(self) -> dict[str, list[str]]:
        return {w: sorted(s) for w, s in sorted(self._entries.items())}

    def __eq__(self, other):
        return isinstance(other, SynonymDictionary) and self.as_dict() == other.as_dict()


class Ontology:
    """In-memory knowledge base. Use :func:`load_ontology` to construct."""

    def __init__(self):
        self.classes: dict[str, OntologyClass] = {}
        self.instances: dict[str, Instance] = {}
        self.templates: dict[str, SentenceTemplate] = {}
        self.synonyms = SynonymDictionary()
        self.entity_type_map: dict[str, str] = {}
        self.category_map: dict[str, str] = {}
        self.revision = 0

    # ---- queries ----

    def root(self) -> OntologyClass:
        return self.classes[ROOT_NAME]

    def children_of(self, name: str) -> list[OntologyClass]:
        """Children in declaration order; freshly inserted classes come last."""
        return [c for c in self.classes.values() if c.parent == name]

    def ancestors(self, name: str) -> list[str]:
        """Parent chain from the immediate parent up to the root."""
        chain = []
        cursor = self.classes[name].parent
        while cursor is not None:
            chain.append(cursor)
            cursor = self.classes[cursor].parent
        return chain

    def depth(self, name: str) -> int:
        return len(self.ancestors(name))

    def class_categories(self, name: str) -> set[str]:
        cats = set(self.classes[name].categories)
        cats.update(p for p, c in self.category_map.items() if c == name)
        return cats

    def known_folds(self) -> dict[str, str]:
        """fold(name or display name) -> class name, for duplicate checks."""
        table: dict[str, str] = {}
        for cls in self.classes.values():
            table.setdefault(fold(cls.name), cls.name)
            table.setdefault(fold(cls.display_name), cls.name)
        return table

    def find_class(self, phrase: str) -> str | None:
        """Class whose name/display name matches the phrase or one of its
        synonyms, lemma-folded. Returns the class name or None."""
        table = self.known_folds()
        for key in [fold(phrase)] + self.synonyms.lookup(phrase):
            if key in table:
                return table[key]
        return None

    def is_known_concept(self, phrase: str) -> bool:
        return self.find_class(phrase) is not None

    def instances_of(self, class_name: str) -> list[Instance]:
        return [i for i in self.instances.values() if i.class_name == class_name]

    # ---- mutations (single writer) ----

    def insert_class(self, name: str, parent: str) -> None:
        """Add a new leaf class under ``parent``.

        Duplicate detection is lemma-folded and synonym-aware: proposing a
        concept the system already knows is reported, not silently re-added.
        """
        if parent not in self.classes:
            raise UnknownClassError(f"unknown parent class {parent!r}")
        existing = self.find_class(name)
        if existing is not None:
            raise DuplicateConceptError(
                f"concept {name!r} already known as class {existing!r}; no insertion needed"
            )
        self.classes[name] = OntologyClass(name=name, display_name=name, parent=parent)
        self.revision += 1

    def attach_sentence(self, class_name: str, sentence: str, layer: str, owner: str) -> str:
        """Append a sentence to the (class, layer, owner) instance, creating
        the instance on first use. Returns the instance id."""
        if class_name not in self.classes:
            raise UnknownClassError(f"unknown class {class_name!r}")
        sentence = sentence.strip()
        if not sentence:
            raise EmptySentenceError("cannot attach an empty sentence")
        if layer not in LAYERS:
            raise ValueError(f"layer must be one of {LAYERS}")
        inst = next(
            (
                i
                for i in self.instances.values()
                if i.class_name == class_name and i.layer == layer and i.owner == owner
            ),
            None,
        )
        if inst is None:
            base = f"{owner}_{class_name}".upper().replace(" ", "_")
            inst_id, n = base, 1
            while inst_id in self.instances:
                n += 1
                inst_id = f"{base}_{n}"
            inst = Instance(
                id=inst_id,
                class_name=class_name,
                layer=layer,
                culture=owner if layer == "CS" else None,
                user=owner if layer == "PS" else None,
            )
            self.instances[inst.id] = inst
        inst.sentences.append(sentence)
        self.revision += 1
        return inst.id

    # ---- auxiliary lookups ----

    def map_entity_type(self, entity_type: str) -> str | None:
        """Mapped class for an entity-type tag; OTHER carries no information."""
        if entity_type == "OTHER":
            return None
        return self.entity_type_map.get(entity_type)

    def classes_for_categories(self, categories: list[str]) -> list[str]:
        """Classes sharing at least one category path with the input, ordered
        by (shared count desc, taxonomy depth asc, name)."""
        wanted = set(categories)
        scored = []
        for name in self.classes:
            shared = len(wanted & self.class_categories(name))
            if shared:
                scored.append((-shared, self.depth(name), name))
        return [name for _, _, name in sorted(scored)]

    def lookup_synonyms(self, word: str) -> list[str]:
        return self.synonyms.lookup(word)

    # ---- integrity ----

    def check_integrity(self) -> None:
        """Re-verify every referential invariant; raises on the first failure."""
        roots = [c for c in self.classes.values() if c.parent is None]
        if len(roots) != 1 or roots[0].name != ROOT_NAME:
            raise OntologyIntegrityError(
                f"expected exactly one root class named {ROOT_NAME!r}", ROOT_NAME
            )
        for cls in self.classes.values():
            if cls.parent is not None and cls.parent not in self.classes:
                raise OntologyIntegrityError(
                    f"class {cls.name!r} references missing parent {cls.parent!r}", cls.name
                )
        for cls in self.classes.values():
            seen = {cls.name}
            cursor = cls.parent
            while cursor is not None:
                if cursor in seen:
                    raise OntologyIntegrityError(
                        f"parent cycle involving {cursor!r}", cursor
                    )
                seen.add(cursor)
                cursor = self.classes[cursor].parent
        for cls in self.classes.values():
            for tid in cls.templates:
                if tid not in self.templates:
                    raise OntologyIntegrityError(
                        f"class {cls.name!r} references missing template {tid!r}", cls.name
                    )
        for inst in self.instances.values():
            if inst.class_name not in self.classes:
                raise OntologyIntegrityError(
                    f"instance {inst.id!r} references missing class {inst.class_name!r}",
                    inst.id,
                )
            if inst.layer == "CS" and not inst.culture:
                raise OntologyIntegrityError(
                    f"CS instance {inst.id!r} must carry a culture tag", inst.id
                )
            if inst.layer == "PS" and not inst.user:
                raise OntologyIntegrityError(
                    f"PS instance {inst.id!r} must carry a user tag", inst.id
                )
            for link in inst.topic_links:
                if link not in self.instances:
                    raise OntologyIntegrityError(
                        f"instance {inst.id!r} links to missing instance {link!r}", inst.id
                    )
        for tag, cls in self.entity_type_map.items():
            if cls not in self.classes:
                raise OntologyIntegrityError(
                    f"entity type {tag!r} maps to missing class {cls!r}", tag
                )
        for path, cls in self.category_map.items():
            if cls not in self.classes:
                raise OntologyIntegrityError(
                    f"category {path!r} maps to missing class {cls!r}", path
                )


# ---- document I/O ----

_CLASS_KEYS = {"name", "display_name", "parent", "keywords", "entity_type", "categories", "templates"}
_INSTANCE_KEYS = {"id", "class", "layer", "culture", "user", "sentences", "likeliness", "topic_links"}
_TOP_KEYS = {"classes", "instances", "synonyms", "entity_type_map", "category_map"}
_TEMPLATE_KEYS = {"id", "kind", "text"}


def _reject_unknown(record: dict, allowed: set[str], where: str) -> None:
    unknown = set(record) - allowed
    if unknown:
        raise OntologyParseError(f"unknown keys {sorted(unknown)} in {where}")


def load_ontology(document: str | dict) -> Ontology:
    """Parse and validate an ontology document.

    Schema (JSON, UTF-8, unknown keys rejected):
      classes:  [{name, display_name, parent, keywords[], entity_type?,
                  categories[], templates[{id, kind, text}]}]
      instances:[{id, class, layer, culture?, user?, sentences[],
                  likeliness, topic_links[]}]
      synonyms: {word: [words]}          entity_type_map: {tag: class}
      category_map: {path: class}

    Raises :class:`OntologyParseError` on malformed documents and
    :class:`OntologyIntegrityError` (naming the offending element) when a
    reference dangles, a name repeats or the parent chain cycles.
    """
    if isinstance(document, str):
        try:
            raw = json.loads(document)
        except json.JSONDecodeError as exc:
            raise OntologyParseError(f"invalid JSON: {exc}") from exc
    else:
        raw = document
    if not isinstance(raw, dict):
        raise OntologyParseError("top level must be an object")
    _reject_unknown(raw, _TOP_KEYS, "document")

    onto = Ontology()
    for rec in raw.get("classes", []):
        _reject_unknown(rec, _CLASS_KEYS, f"class {rec.get('name', '?')!r}")
        name = rec.get("name")
        if not name or not isinstance(name, str):
            raise OntologyParseError("class record without a name")
        if name in onto.classes:
            raise OntologyIntegrityError(f"duplicate class name {name!r}", name)
        template_ids = []
        for trec in rec.get("templates", []):
            _reject_unknown(trec, _TEMPLATE_KEYS, f"template in class {name!r}")
            try:
                template = SentenceTemplate(trec["id"], trec["kind"], trec["text"])
            except (KeyError, ValueError) as exc:
                raise OntologyParseError(f"bad template in class {name!r}: {exc}") from exc
            if template.id in onto.templates:
                raise OntologyIntegrityError(
                    f"duplicate template id {template.id!r}", template.id
                )
            onto.templates[template.id] = template
            template_ids.append(template.id)
        onto.classes[name] = OntologyClass(
            name=name,
            display_name=rec.get("display_name", name),
            parent=rec.get("parent"),
            keywords=list(rec.get("keywords", [])),
            entity_type=rec.get("entity_type"),
            categories=list(rec.get("categories", [])),
            templates=template_ids,
        )
    for rec in raw.get("instances", []):
        _reject_unknown(rec, _INSTANCE_KEYS, f"instance {rec.get('id', '?')!r}")
        inst_id = rec.get("id")
        if not inst_id:
            raise OntologyParseError("instance record without an id")
        if inst_id in onto.instances:
            raise OntologyIntegrityError(f"duplicate instance id {inst_id!r}", inst_id)
        try:
            likeliness = LikelinessValue(rec.get("likeliness", "Medium"))
        except ValueError as exc:
            raise OntologyParseError(f"instance {inst_id!r}: {exc}") from exc
        onto.instances[inst_id] = Instance(
            id=inst_id,
            class_name=rec.get("class", ""),
            layer=rec.get("layer", ""),
            culture=rec.get("culture"),
            user=rec.get("user"),
            sentences=list(rec.get("sentences", [])),
            likeliness=likeliness,
            topic_links=list(rec.get("topic_links", [])),
        )
        if onto.instances[inst_id].layer not in LAYERS:
            raise OntologyParseError(f"instance {inst_id!r}: layer must be CS or PS")
    onto.synonyms = SynonymDictionary(raw.get("synonyms", {}))
    onto.entity_type_map = dict(raw.get("entity_type_map", {}))
    onto.category_map = dict(raw.get("category_map", {}))
    onto.check_integrity()
    onto.revision = 0
    return onto


def serialize_ontology(onto: Ontology) -> dict:
    """Inverse of :func:`load_ontology`; round-trips field-for-field."""
    classes = []
    for cls in onto.classes.values():
        rec: dict = {"name": cls.name, "display_name": cls.display_name}
        if cls.parent is not None:
            rec["parent"] = cls.parent
        rec["keywords"] = list(cls.keywords)
        if cls.entity_type is not None:
            rec["entity_type"] = cls.entity_type
        rec["categories"] = list(cls.categories)
        rec["templates"] = [
            {"id": t.id, "kind": t.kind, "text": t.text}
            for t in (onto.templates[tid] for tid in cls.templates)
        ]
        classes.append(rec)
    instances = []
    for inst in onto.instances.values():
        rec = {"id": inst.id, "class": inst.class_name, "layer": inst.layer}
        if inst.culture is not None:
            rec["culture"] = inst.culture
        if inst.user is not None:
            rec["user"] = inst.user
        rec["sentences"] = list(inst.sentences)
        rec["likeliness"] = inst.likeliness.label
        rec["topic_links"] = list(inst.topic_links)
        instances.append(rec)
    return {
        "classes": classes,
        "instances": instances,
        "synonyms": onto.synonyms.as_dict(),
        "entity_type_map": dict(onto.entity_type_map),
        "category_map": dict(onto.category_map),
    }


# Module-level operation aliases (the class methods are the implementation).

def insert_class(onto: Ontology, name: str, parent: str) -> Ontology:
    onto.insert_class(name, parent)
    return onto


def attach_sentence(onto: Ontology, class_name: str, sentence: str, layer: str, owner: str) -> str:
    return onto.attach_sentence(class_name, sentence, layer, owner)


def map_entity_type(onto: Ontology, entity_type: str) -> str | None:
    return onto.map_entity_type(entity_type)


def classes_for_categories(onto: Ontology, categories: list[str]) -> list[str]:
    return onto.classes_for_categories(categories)


def lookup_synonyms(onto: Ontology, word: str) -> list[str]:
    return onto.lookup_synonyms(word)
