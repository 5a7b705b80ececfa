"""Interactive insertion of a new concept into the taxonomy.

Four strategies drive one question/answer state machine:

1. depth-first: yes/no descent from the root, no backtracking;
2. entity type: propose the class mapped from the concept's entity type as
   the starting point, then descend locally; unmapped or rejected types
   degrade to method 1;
3. definitions: ask for one-word definitions, stacking them until one (or a
   synonym) names a known class, then insert the whole stack as a branch,
   most general concept first;
4. content classification: ask for a sentence about the concept, derive
   candidate starting classes from its categories and keywords, and propose
   them one after the other.

A session never mutates the knowledge base; it accumulates an insertion
plan that :func:`attach_and_patch` commits under an optimistic revision
guard. Steps count answered questions, excluding the final accepted attach
confirmation.
"""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field

from .errors import (
    DuplicateConceptError,
    IllegalAnswerError,
    OracleInconsistentError,
    SessionFinishedError,
    StaleRevisionError,
    UnknownMethodError,
)
from .nlu import AtomicSentence, NluProvider
from .ontology import ROOT_NAME, Ontology
from .text import NO_WORDS, YES_WORDS, fold, is_stop_phrase, words
from .tree import DialogueTree, patch_tree

QUESTION_KINDS = (
    "yes-no",
    "ask-definition",
    "ask-sentence",
    "propose-start",
    "propose-leaf-attach",
    "propose-sibling-attach",
)

ANSWER_KINDS = ("yes", "no", "free-text", "stop")

_LEGAL_ANSWERS = {
    "yes-no": {"yes", "no", "stop"},
    "propose-start": {"yes", "no", "stop"},
    "propose-leaf-attach": {"yes", "no", "stop"},
    "propose-sibling-attach": {"yes", "no", "stop"},
    "ask-definition": {"free-text", "stop"},
    "ask-sentence": {"free-text", "stop"},
}

QUESTION_TEMPLATES = {
    "yes-no": "Is it correct to say that {concept} is a type of {cls}?",
    "propose-start": "Is {concept} a kind of {cls}?",
    "propose-leaf-attach": "Can I add {concept} as a new kind of {cls}?",
    "propose-sibling-attach": "Can I add {concept} as a new kind of {cls}?",
    "ask-definition": (
        "I'm not sure what you are talking about. "
        "Please, try to define {concept} with one word"
    ),
    "ask-sentence": "Please tell me a sentence about {concept}",
}


@dataclass(frozen=True)
class Question:
    kind: str
    text: str
    subject: str
    object: str | None = None

    def __post_init__(self):
        if self.kind not in QUESTION_KINDS:
            raise ValueError(f"unknown question kind {self.kind!r}")
        needs_object = self.kind not in ("ask-definition", "ask-sentence")
        if needs_object != (self.object is not None):
            raise ValueError(f"question kind {self.kind!r} and object are inconsistent")


@dataclass(frozen=True)
class Answer:
    kind: str
    text: str | None = None

    def __post_init__(self):
        if self.kind not in ANSWER_KINDS:
            raise ValueError(f"unknown answer kind {self.kind!r}")
        if self.kind == "free-text":
            if not (self.text and self.text.strip()):
                raise ValueError("free-text answers require text")
            # "stop" / "I don't know" normalize to a stop answer
            if is_stop_phrase(self.text):
                object.__setattr__(self, "kind", "stop")

    @classmethod
    def from_user_text(cls, text: str) -> "Answer":
        normalized = " ".join(words(text))
        if is_stop_phrase(text):
            return cls("stop")
        if normalized in YES_WORDS:
            return cls("yes")
        if normalized in NO_WORDS:
            return cls("no")
        return cls("free-text", text=text.strip())


@dataclass
class OracleUser:
    """Scripted stand-in for the person driving an insertion session.

    Yes/no questions are answered truthfully with respect to the intended
    parent: ``target_parent`` for the main concept, or the class named by a
    concept's own scripted definition for stacked definitions. Definition
    and sentence prompts consume the scripts; an exhausted script emits
    stop.
    """

    target_parent: str
    definitions: dict[str, list[str]] = field(default_factory=dict)
    sentences: dict[str, str] = field(default_factory=dict)
    _cursor: dict[str, int] = field(default_factory=dict)

    def _defs(self, subject: str) -> list[str]:
        return self.definitions.get(fold(subject), [])

    def _first_def(self, subject: str) -> str | None:
        defs = self._defs(subject)
        return defs[0] if defs else None

    def _truth_class(self, subject: str, onto: Ontology) -> str:
        first = self._first_def(subject)
        if first is not None:
            cls = onto.find_class(first)
            if cls is not None and cls != ROOT_NAME:
                return cls
        return self.target_parent

    def answer(self, question: Question, onto: Ontology) -> Answer:
        kind, subject, obj = question.kind, question.subject, question.object
        if kind == "ask-definition":
            defs = self._defs(subject)
            i = self._cursor.get(fold(subject), 0)
            if i >= len(defs):
                return Answer("stop")
            self._cursor[fold(subject)] = i + 1
            return Answer("free-text", text=defs[i])
        if kind == "ask-sentence":
            sentence = self.sentences.get(fold(subject))
            return Answer("free-text", text=sentence) if sentence else Answer("stop")
        assert obj is not None
        if obj not in onto.classes:
            # virtual anchor from the definition chain
            first = self._first_def(subject)
            return Answer("yes" if first and fold(obj) == fold(first) else "no")
        truth = self._truth_class(subject, onto)
        if kind in ("propose-leaf-attach", "propose-sibling-attach"):
            return Answer("yes" if obj == truth else "no")
        on_path = obj == truth or obj in onto.ancestors(truth)
        return Answer("yes" if on_path else "no")


@dataclass
class InsertionSession:
    id: str
    concept: str
    method: int
    base_revision: int
    user: str = "user"
    cursor: str | None = None
    mode: str = "seeking-start"
    definition_stack: list[str] = field(default_factory=list)
    candidate_starts: list[str] = field(default_factory=list)
    insert_plan: list[tuple[str, str]] = field(default_factory=list)  # (name, parent)
    transcript: list[tuple[Question, Answer]] = field(default_factory=list)
    outcome: str = "pending"
    pending: Question | None = None
    fallback_used: bool = False
    collected_sentence: str | None = None
    # automaton internals
    _subject: str = ""
    _children_left: list[str] = field(default_factory=list)
    _chain: list[str] = field(default_factory=list)

    @property
    def steps(self) -> int:
        """Answered questions, excluding the final accepted attach."""
        return len(self.transcript) - (1 if self.outcome == "inserted" else 0)

    @property
    def inserted(self) -> list[str]:
        return [name for name, _ in self.insert_plan]


def _display(onto: Ontology, name: str) -> str:
    if name in onto.classes:
        return onto.classes[name].display_name.lower()
    return name  # virtual chain class: already a lemma


def _question(kind: str, onto: Ontology, subject: str, obj: str | None = None) -> Question:
    text = QUESTION_TEMPLATES[kind].format(
        concept=subject, cls=_display(onto, obj) if obj is not None else ""
    )
    return Question(kind=kind, text=text, subject=subject, object=obj)


def _enter_level(
    session: InsertionSession, onto: Ontology, tree: DialogueTree, topic: str
) -> Question:
    """Start asking about the class children of ``topic``; a childless topic
    goes straight to the leaf-attach proposal. Induced (topic-link) nodes
    are conversation topics, not taxonomy classes, and are skipped."""
    session.cursor = topic
    children = tree.class_children(topic)
    if children:
        session.mode = "local-descent"
        session._children_left = list(children)
        return _question("yes-no", onto, session._subject, children[0])
    session.mode = "confirming-attach"
    return _question("propose-leaf-attach", onto, session._subject, topic)


def _fallback_to_depth_first(
    session: InsertionSession, onto: Ontology, tree: DialogueTree
) -> Question:
    session.fallback_used = True
    session._subject = session.concept
    session._chain = []
    session.candidate_starts = []
    return _enter_level(session, onto, tree, tree.root)


def start_session(
    concept: str,
    method: int,
    context: dict | None,
    onto: Ontology,
    tree: DialogueTree,
    user: str = "user",
) -> tuple[InsertionSession, Question]:
    """Open a session for a concept the knowledge base does not know yet.

    Method 1 starts the yes/no descent at the root; method 2 proposes the
    class mapped from ``context["entity_type"]`` (and behaves exactly like
    method 1 when the type is unmapped or OTHER); method 3 asks for a
    definition; method 4 asks for a sentence.
    """
    if method not in (1, 2, 3, 4):
        raise UnknownMethodError(f"unknown insertion method {method!r}")
    concept = fold(concept)
    if not concept:
        raise ValueError("concept must be nonempty")
    existing = onto.find_class(concept)
    if existing is not None:
        raise DuplicateConceptError(
            f"concept {concept!r} already known as class {existing!r}"
        )
    context = context or {}
    session = InsertionSession(
        id=uuid.uuid4().hex,
        concept=concept,
        method=method,
        base_revision=onto.revision,
        user=user,
    )
    session._subject = concept
    if method == 1:
        question = _enter_level(session, onto, tree, tree.root)
    elif method == 2:
        mapped = onto.map_entity_type(context.get("entity_type") or "OTHER")
        if mapped is None:
            # no usable starting hint: behave exactly like method 1
            session.fallback_used = True
            question = _enter_level(session, onto, tree, tree.root)
        else:
            session.mode = "seeking-start"
            session.candidate_starts = [mapped]
            question = _question("propose-start", onto, concept, mapped)
    elif method == 3:
        session.definition_stack.append(concept)
        session.mode = "collecting-definition"
        question = _question("ask-definition", onto, concept)
    else:
        session.mode = "collecting-sentence"
        question = _question("ask-sentence", onto, concept)
    session.pending = question
    return session, question


def _extract_definition(text: str, nlu: NluProvider | None) -> str | None:
    """One-word answers are taken verbatim; longer answers go through the
    dedicated definition intent and the last slot filler wins."""
    tokens = words(text)
    if len(tokens) == 1:
        return fold(tokens[0])
    if nlu is None:
        return None
    atom = AtomicSentence(text=text.strip(), source_span=(0, len(text.strip())), ordinal=0)
    matched = nlu.match_intent(atom, intents=("definition",))
    if matched is None or not matched[1]:
        return None
    start, end = matched[1][-1]
    return fold(atom.text[start:end])


def _keyword_start_candidates(
    sentence: str, onto: Ontology, tree: DialogueTree
) -> list[str]:
    """Classes whose keyword set appears (lemma-folded) in the sentence,
    ordered from the highest to the lowest in the hierarchy."""
    sentence_words = [fold(w) for w in words(sentence)]
    hits = []
    for name in onto.classes:
        if name == ROOT_NAME:
            continue
        node = tree.index[name]
        for keyword in node.keywords:
            kw = keyword.split()
            if any(
                sentence_words[i : i + len(kw)] == kw
                for i in range(len(sentence_words) - len(kw) + 1)
            ):
                hits.append((onto.depth(name), name))
                break
    return [name for _, name in sorted(hits)]


def _sentence_start_candidates(
    sentence: str, onto: Ontology, tree: DialogueTree, nlu: NluProvider | None
) -> list[str]:
    categories = [c.path for c in nlu.classify_content(sentence)] if nlu else []
    by_category = [
        c for c in onto.classes_for_categories(categories) if c != ROOT_NAME
    ]
    by_keyword = _keyword_start_candidates(sentence, onto, tree)
    if by_category and by_keyword:
        keyword_set = set(by_keyword)
        return [c for c in by_category if c in keyword_set]
    return by_category or by_keyword


def answer(
    session: InsertionSession,
    a: Answer,
    onto: Ontology,
    tree: DialogueTree,
    nlu: NluProvider | None = None,
) -> tuple[InsertionSession, Question | None]:
    """Feed one answer to the pending question; returns the next question,
    or None when the session reached a terminal outcome."""
    if session.outcome != "pending" or session.pending is None:
        raise SessionFinishedError(f"session {session.id} is {session.outcome}")
    question = session.pending
    if a.kind not in _LEGAL_ANSWERS[question.kind]:
        raise IllegalAnswerError(
            f"answer kind {a.kind!r} is not legal for a {question.kind!r} question"
        )
    session.transcript.append((question, a))
    session.pending = None

    next_question: Question | None = None
    if a.kind == "stop":
        if question.kind in ("ask-definition", "ask-sentence"):
            next_question = _fallback_to_depth_first(session, onto, tree)
        else:
            session.outcome = "aborted"
    elif question.kind == "yes-no":
        assert question.object is not None
        if a.kind == "yes":
            next_question = _enter_level(session, onto, tree, question.object)
        else:
            session._children_left.pop(0)
            if session._children_left:
                next_question = _question(
                    "yes-no", onto, session._subject, session._children_left[0]
                )
            else:
                session.mode = "confirming-attach"
                next_question = _question(
                    "propose-sibling-attach", onto, session._subject, session.cursor
                )
    elif question.kind == "propose-start":
        assert question.object is not None
        if a.kind == "yes":
            next_question = _enter_level(session, onto, tree, question.object)
        else:
            session.candidate_starts.pop(0)
            if session.candidate_starts:
                next_question = _question(
                    "propose-start", onto, session._subject, session.candidate_starts[0]
                )
            else:
                next_question = _fallback_to_depth_first(session, onto, tree)
    elif question.kind in ("propose-leaf-attach", "propose-sibling-attach"):
        assert question.object is not None
        if a.kind == "yes":
            session.insert_plan.append((session._subject, question.object))
            if session._chain and session._chain[0] == session._subject:
                session._chain.pop(0)
            if session._chain:
                session._subject = session._chain[0]
                next_question = _question(
                    "propose-leaf-attach", onto, session._subject, session.insert_plan[-1][0]
                )
                session.mode = "confirming-attach"
            else:
                session.outcome = "inserted"
                session.mode = "finished"
        else:
            session.insert_plan.clear()
            session.outcome = "declined"
            session.mode = "finished"
    elif question.kind == "ask-definition":
        assert a.text is not None
        definition = _extract_definition(a.text, nlu)
        if definition is None or definition in session.definition_stack:
            next_question = _fallback_to_depth_first(session, onto, tree)
        else:
            session.definition_stack.append(definition)
            matched = onto.find_class(definition)
            if matched == ROOT_NAME:
                # defining something as the top concept carries no
                # information: go depth-first from the root
                next_question = _fallback_to_depth_first(session, onto, tree)
            elif matched is not None:
                # insert the stacked concepts below the matched class,
                # from the most general to the most specific
                session._chain = list(reversed(session.definition_stack[:-1]))
                session._subject = session._chain[0]
                session.mode = "seeking-start"
                session.candidate_starts = [matched]
                next_question = _question(
                    "propose-start", onto, session._subject, matched
                )
            else:
                next_question = _question("ask-definition", onto, definition)
                session.mode = "collecting-definition"
    elif question.kind == "ask-sentence":
        assert a.text is not None
        session.collected_sentence = a.text.strip()
        candidates = _sentence_start_candidates(a.text, onto, tree, nlu)
        if candidates:
            session.candidate_starts = candidates
            session.mode = "seeking-start"
            next_question = _question(
                "propose-start", onto, session._subject, candidates[0]
            )
        else:
            next_question = _fallback_to_depth_first(session, onto, tree)

    session.pending = next_question
    return session, next_question


@dataclass(frozen=True)
class InsertionRun:
    transcript: list[tuple[Question, Answer]]
    steps: int
    steps_per_inserted: float
    inserted: list[str]
    fallback_used: bool
    session: InsertionSession


def run_with_oracle(
    concept: str,
    method: int,
    oracle: OracleUser,
    onto: Ontology,
    tree: DialogueTree,
    nlu: NluProvider | None = None,
    entity_type: str | None = None,
) -> InsertionRun:
    """Drive a session to termination with scripted answers.

    Steps are counted from the first question asked to the final attach
    confirmation (excluded). For method 3 the per-concept cost is the total
    divided by the number of inserted concepts; other methods insert
    exactly one concept.
    """
    if oracle.target_parent not in onto.classes:
        raise OracleInconsistentError(
            f"oracle target parent {oracle.target_parent!r} is not in the ontology"
        )
    context = {"entity_type": entity_type}
    session, question = start_session(concept, method, context, onto, tree)
    while session.outcome == "pending" and question is not None:
        session, question = answer(session, oracle.answer(question, onto), onto, tree, nlu)
    if session.outcome != "inserted":
        raise OracleInconsistentError(
            f"oracle answers left {concept!r} uninserted (outcome {session.outcome}); "
            "they imply a parent not in the ontology"
        )
    inserted = session.inserted
    per_inserted = session.steps / len(inserted) if method == 3 else float(session.steps)
    return InsertionRun(
        transcript=list(session.transcript),
        steps=session.steps,
        steps_per_inserted=per_inserted,
        inserted=inserted,
        fallback_used=session.fallback_used,
        session=session,
    )


def attach_and_patch(
    session: InsertionSession, onto: Ontology, tree: DialogueTree
) -> tuple[Ontology, DialogueTree]:
    """Commit a finished session's insertion plan.

    The plan is applied in order (most general first), patching the tree
    after each class so the result equals a full rebuild. If the ontology
    moved since the session started, nothing is committed and the session
    is aborted.
    """
    if session.outcome != "inserted":
        raise SessionFinishedError(
            f"session {session.id} is {session.outcome}; only inserted sessions commit"
        )
    if onto.revision != session.base_revision:
        session.outcome = "aborted"
        raise StaleRevisionError(
            f"ontology at revision {onto.revision}, session started at "
            f"{session.base_revision}; commit aborted"
        )
    for name, parent in session.insert_plan:
        onto.insert_class(name, parent)
        tree = patch_tree(tree, onto, name)
    return onto, tree


def transcript_records(session: InsertionSession) -> list[dict]:
    return [
        {
            "step": i + 1,
            "question": {"kind": q.kind, "text": q.text, "object": q.object},
            "answer": {"kind": a.kind, "text": a.text},
        }
        for i, (q, a) in enumerate(session.transcript)
    ]


def transcript_text(session: InsertionSession) -> str:
    """Canonical transcript file content; stable across transports."""
    return json.dumps(transcript_records(session), indent=2, ensure_ascii=False) + "\n"
