"""Dialogue tree: conversation topics generated from the knowledge base.

Each taxonomy class maps to one topic node; topic links between instances
attach an extra combined topic as a sibling of the linking topic (the
Milk/Tea pattern). Sentence templates are inherited down the taxonomy and
instantiated per node, so a question attached to a parent class is also
available, re-rendered, on every descendant.

Trees are immutable after build/patch; patching produces a new value.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import StaleRevisionError
from .ontology import Ontology, TEMPLATE_KINDS
from .text import fold, words

_DEFAULT_LIKELINESS = 0.5


@dataclass
class TopicNode:
    topic: str
    display: str
    parent: str | None
    children: list[str] = field(default_factory=list)
    keywords: list[str] = field(default_factory=list)
    sentences: dict[str, list[str]] = field(default_factory=dict)
    # attitude per culture / per user, baked in from the instance layers
    likeliness_cs: dict[str, float] = field(default_factory=dict)
    likeliness_ps: dict[str, float] = field(default_factory=dict)
    is_class: bool = True  # False for topic-link-induced nodes


@dataclass
class DialogueTree:
    root: str
    index: dict[str, TopicNode]
    source_revision: int

    def node(self, topic: str) -> TopicNode:
        return self.index[topic]

    def depth(self, topic: str) -> int:
        d, cursor = 0, self.index[topic].parent
        while cursor is not None:
            d += 1
            cursor = self.index[cursor].parent
        return d

    def class_children(self, topic: str) -> list[str]:
        return [c for c in self.index[topic].children if self.index[c].is_class]


def _node_keywords(display: str, extra: list[str]) -> list[str]:
    seen, out = set(), []
    for kw in [fold(display)] + [fold(k) for k in extra]:
        if kw and kw not in seen:
            seen.add(kw)
            out.append(kw)
    return out


def _inherited_templates(onto: Ontology, class_name: str) -> list[str]:
    """Template ids on the class and all its ancestors, ancestors first."""
    chain = list(reversed(onto.ancestors(class_name))) + [class_name]
    out, seen = [], set()
    for name in chain:
        for tid in onto.classes[name].templates:
            if tid not in seen:
                seen.add(tid)
                out.append(tid)
    return out


def _render_sentences(onto: Ontology, template_ids: list[str], display: str) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for tid in template_ids:
        template = onto.templates[tid]
        groups.setdefault(template.kind, []).append(
            template.text.replace("$hasName", display)
        )
    return {k: groups[k] for k in TEMPLATE_KINDS if k in groups}


def _apply_instances(node: TopicNode, onto: Ontology, class_name: str) -> None:
    for inst in onto.instances_of(class_name):
        if inst.layer == "CS" and inst.culture:
            node.likeliness_cs[inst.culture] = inst.likeliness.numeric
        elif inst.layer == "PS" and inst.user:
            node.likeliness_ps[inst.user] = inst.likeliness.numeric
        if inst.sentences:
            node.sentences.setdefault("positive-assertion", []).extend(inst.sentences)


def _build_class_node(onto: Ontology, class_name: str) -> TopicNode:
    cls = onto.classes[class_name]
    node = TopicNode(
        topic=cls.name,
        display=cls.display_name,
        parent=cls.parent,
        keywords=_node_keywords(cls.display_name, cls.keywords),
        sentences=_render_sentences(onto, _inherited_templates(onto, class_name), cls.display_name),
    )
    _apply_instances(node, onto, class_name)
    return node


def _induced_attachments(onto: Ontology) -> list[tuple[str, str]]:
    """(filler class, linking class) pairs from hasTopic links, deduplicated,
    in instance declaration order. Only links within one layer and owner
    induce edges."""
    pairs, seen = [], set()
    for inst in onto.instances.values():
        for link in inst.topic_links:
            other = onto.instances[link]
            if other.layer != inst.layer or other.owner != inst.owner:
                continue
            pair = (other.class_name, inst.class_name)
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    return pairs


def _build_induced_node(onto: Ontology, filler: str, linking: str) -> TopicNode:
    filler_cls, linking_cls = onto.classes[filler], onto.classes[linking]
    display = f"{filler_cls.display_name} {linking_cls.display_name}"
    template_ids = _inherited_templates(onto, filler)
    for tid in _inherited_templates(onto, linking):
        if tid not in template_ids:
            template_ids.append(tid)
    return TopicNode(
        topic=f"{filler}{linking}",
        display=display,
        parent=linking_cls.parent if linking_cls.parent is not None else linking,
        # only the combined phrase: single-word keywords of the source
        # classes must keep triggering their own topics
        keywords=_node_keywords(display, []),
        sentences=_render_sentences(onto, template_ids, display),
        is_class=False,
    )


def build_tree(onto: Ontology) -> DialogueTree:
    """Map every class (and topic-link attachment) to a conversation topic.

    A pure function of the ontology content: equal ontologies build
    structurally identical trees.
    """
    onto.check_integrity()
    index: dict[str, TopicNode] = {}
    for name in onto.classes:
        index[name] = _build_class_node(onto, name)
    for name, node in index.items():
        if node.parent is not None:
            index[node.parent].children.append(name)
    for filler, linking in _induced_attachments(onto):
        node = _build_induced_node(onto, filler, linking)
        if node.topic not in index:
            index[node.topic] = node
            index[node.parent].children.append(node.topic)
    return DialogueTree(root=onto.root().name, index=index, source_revision=onto.revision)


def _clone(tree: DialogueTree) -> DialogueTree:
    index = {
        t: TopicNode(
            topic=n.topic,
            display=n.display,
            parent=n.parent,
            children=list(n.children),
            keywords=list(n.keywords),
            sentences={k: list(v) for k, v in n.sentences.items()},
            likeliness_cs=dict(n.likeliness_cs),
            likeliness_ps=dict(n.likeliness_ps),
            is_class=n.is_class,
        )
        for t, n in tree.index.items()
    }
    return DialogueTree(root=tree.root, index=index, source_revision=tree.source_revision)


def patch_tree(tree: DialogueTree, onto: Ontology, touched_class: str) -> DialogueTree:
    """Incorporate exactly one mutation (insert_class or attach_sentence on
    ``touched_class``) without rebuilding the whole tree.

    The result is node-for-node equal to a full rebuild. Raises
    :class:`StaleRevisionError` when the revision delta is not exactly one;
    the caller must rebuild in that case.
    """
    if onto.revision != tree.source_revision + 1:
        raise StaleRevisionError(
            f"tree built at revision {tree.source_revision}, "
            f"ontology now at {onto.revision}; delta must be exactly one"
        )
    if touched_class not in onto.classes:
        raise StaleRevisionError(f"unknown touched class {touched_class!r}")
    patched = _clone(tree)
    if touched_class in patched.index:
        # attach_sentence: regenerate the touched node's data in place
        old = patched.index[touched_class]
        fresh = _build_class_node(onto, touched_class)
        fresh.children = old.children
        patched.index[touched_class] = fresh
    else:
        # insert_class: new leaf goes after its class siblings, before any
        # induced siblings, mirroring full-rebuild order
        node = _build_class_node(onto, touched_class)
        patched.index[touched_class] = node
        parent = patched.index[node.parent]
        class_count = sum(1 for c in parent.children if patched.index[c].is_class)
        parent.children.insert(class_count, touched_class)
    patched.source_revision = onto.revision
    return patched


def trees_equal(a: DialogueTree, b: DialogueTree) -> bool:
    """Structural equality, node for node (revision excluded)."""
    if a.root != b.root or set(a.index) != set(b.index):
        return False
    for topic, node in a.index.items():
        other = b.index[topic]
        if (
            node.parent != other.parent
            or node.children != other.children
            or node.display != other.display
            or node.keywords != other.keywords
            or node.sentences != other.sentences
            or node.likeliness_cs != other.likeliness_cs
            or node.likeliness_ps != other.likeliness_ps
            or node.is_class != other.is_class
        ):
            return False
    return True


def trigger_topic(tree: DialogueTree, sentence: str) -> TopicNode | None:
    """Node whose keyword set has the longest lemmatized match in the
    sentence; None when nothing matches. Longer keyword wins; ties prefer
    the deeper node, then the lexicographically smaller topic id."""
    sentence_words = [fold(w) for w in words(sentence)]
    best_key, best_node = None, None
    for topic in sorted(tree.index):
        node = tree.index[topic]
        for keyword in node.keywords:
            kw_tokens = keyword.split()
            n = len(kw_tokens)
            if n == 0 or n > len(sentence_words):
                continue
            hit = any(
                sentence_words[i : i + n] == kw_tokens
                for i in range(len(sentence_words) - n + 1)
            )
            if not hit:
                continue
            key = (n, len(keyword), tree.depth(topic))
            if best_key is None or key > best_key:
                best_key, best_node = key, node
    return best_node


def _node_likeliness(node: TopicNode, user_tag: str) -> float:
    if user_tag in node.likeliness_ps:
        return node.likeliness_ps[user_tag]
    if node.likeliness_cs:
        return max(node.likeliness_cs.values())
    return _DEFAULT_LIKELINESS


def next_topic(
    tree: DialogueTree,
    current: TopicNode,
    user_tag: str,
    visited: set[str] | None = None,
) -> TopicNode:
    """Branch-following policy: highest-likeliness unvisited child (the
    person-specific value overrides the cultural one), else the first
    unvisited sibling, else the parent. ``visited`` is the caller's
    per-session visit memory."""
    visited = visited or set()
    unvisited = [c for c in current.children if c not in visited]
    if unvisited:
        return tree.node(
            max(
                unvisited,
                key=lambda c: (
                    _node_likeliness(tree.node(c), user_tag),
                    -current.children.index(c),
                ),
            )
        )
    if current.parent is not None:
        for sibling in tree.node(current.parent).children:
            if sibling != current.topic and sibling not in visited:
                return tree.node(sibling)
        return tree.node(current.parent)
    return current


def export_tree(tree: DialogueTree) -> dict:
    """Serializable dump for the UI tree view and golden-file tests."""
    nodes = []
    stack = [tree.root]
    while stack:
        topic = stack.pop(0)
        node = tree.index[topic]
        nodes.append(
            {
                "topic": node.topic,
                "display": node.display,
                "parent": node.parent,
                "children": list(node.children),
                "sentences": {k: list(v) for k, v in node.sentences.items()},
            }
        )
        stack.extend(node.children)
    return {"root": tree.root, "source_revision": tree.source_revision, "nodes": nodes}


def dump_tree_text(tree: DialogueTree) -> str:
    """Canonical JSON text of the export; used for byte-compare contracts."""
    return json.dumps(export_tree(tree), indent=2, ensure_ascii=False) + "\n"
