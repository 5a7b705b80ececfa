"""Turn-loop orchestration: topic triggering, branch following, extraction
and the insertion-session lifecycle, independent of any transport.

The engine is the single writer of its ontology; insertion sessions read
the live value and commit through an optimistic revision guard. Sessions
are answered through :meth:`Engine.answer_session` (the CLI and the HTTP
API both route there), so transcripts are transport-neutral.
"""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import insertion
from .errors import StaleRevisionError
from .extraction import ExtractionResult, extract_concepts
from .insertion import Answer, InsertionSession, Question
from .nlu import LocalNluProvider
from .ontology import Ontology
from .tree import DialogueTree, build_tree, dump_tree_text, next_topic, patch_tree, trigger_topic

logger = logging.getLogger(__name__)

TURN_ACTIONS = ("topic-triggered", "branch-followed", "extraction-started", "nothing")


@dataclass(frozen=True)
class TurnResult:
    action: str
    robot_utterance: str
    topic: str | None = None
    session_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "robot_utterance": self.robot_utterance,
            "topic": self.topic,
            "session_id": self.session_id,
        }


@dataclass
class SessionStore:
    """Sessions by id; finished sessions are retained until purged."""

    sessions: dict[str, InsertionSession] = field(default_factory=dict)

    def add(self, session: InsertionSession) -> None:
        self.sessions[session.id] = session

    def get(self, session_id: str) -> InsertionSession | None:
        return self.sessions.get(session_id)

    def purge(self, session_id: str) -> bool:
        return self.sessions.pop(session_id, None) is not None


class Engine:
    def __init__(
        self,
        onto: Ontology,
        nlu: LocalNluProvider,
        method_policy: int | list[int] = 3,
        default_user: str = "user",
        journal_path: str | Path | None = None,
    ):
        self.ontology = onto
        self.nlu = nlu
        self.tree: DialogueTree = build_tree(onto)
        self.method_policy = method_policy
        self.default_user = default_user
        self.journal_path = Path(journal_path) if journal_path else None
        self.store = SessionStore()
        self._visited: dict[str, set[str]] = {}
        self._position: dict[str, str] = {}
        self._awaiting_sentence: dict[str, str] = {}  # user -> class awaiting a sentence
        self._utterance_turns: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()

    # ---- helpers ----

    def _pick_method(self, entity_type: str | None) -> int:
        policy = self.method_policy
        if isinstance(policy, int):
            return policy
        for method in policy:
            if method == 2 and self.ontology.map_entity_type(entity_type or "OTHER") is None:
                continue
            return method
        return 1

    def _node_utterance(self, user: str, topic: str) -> str:
        """Deterministic round-robin over the node's sentences (questions
        first), in place of the production system's random variation."""
        node = self.tree.node(topic)
        pool = []
        for kind in ("question", "positive-assertion", "negative-assertion"):
            pool.extend(node.sentences.get(kind, []))
        if not pool:
            return f"Tell me more about {node.display.lower()}."
        turn = self._utterance_turns.get((user, topic), 0)
        self._utterance_turns[(user, topic)] = turn + 1
        return pool[turn % len(pool)]

    def _visit(self, user: str, topic: str) -> None:
        self._visited.setdefault(user, set()).add(topic)
        self._position[user] = topic

    # ---- the turn loop ----

    def handle_user_turn(
        self, sentence: str, user: str | None = None, method_policy: int | None = None
    ) -> TurnResult:
        """One conversational turn.

        A pending sentence request (after a successful insertion) consumes
        the turn; otherwise the sentence may trigger a topic, start an
        extraction-driven insertion session, or simply make the conversation
        follow a branch of the tree. Degenerate input produces action
        "nothing" with a fallback utterance.
        """
        user = user or self.default_user
        with self._lock:
            if user in self._awaiting_sentence and sentence.strip():
                class_name = self._awaiting_sentence.pop(user)
                self.ontology.attach_sentence(class_name, sentence, "PS", user)
                self.tree = patch_tree(self.tree, self.ontology, class_name)
                follow = next_topic(
                    self.tree,
                    self.tree.node(class_name),
                    user,
                    self._visited.setdefault(user, set()),
                )
                self._visit(user, follow.topic)
                return TurnResult(
                    action="branch-followed",
                    robot_utterance="Lovely, I will remember that. "
                    + self._node_utterance(user, follow.topic),
                    topic=follow.topic,
                )

            if not sentence.strip():
                current = self._position.get(user, self.tree.root)
                follow = next_topic(
                    self.tree,
                    self.tree.node(current),
                    user,
                    self._visited.setdefault(user, set()),
                )
                self._visit(user, follow.topic)
                return TurnResult(
                    action="nothing",
                    robot_utterance=self._node_utterance(user, follow.topic),
                    topic=follow.topic,
                )

            node = trigger_topic(self.tree, sentence)
            if node is not None:
                self._visit(user, node.topic)
                return TurnResult(
                    action="topic-triggered",
                    robot_utterance=self._node_utterance(user, node.topic),
                    topic=node.topic,
                )

            result = extract_concepts(sentence, self.nlu, self.ontology)
            if result.best is not None:
                method = method_policy or self._pick_method(result.best.entity_type)
                session, question = insertion.start_session(
                    result.best.lemma,
                    method,
                    {"entity_type": result.best.entity_type, "user_sentence": sentence},
                    self.ontology,
                    self.tree,
                    user=user,
                )
                self.store.add(session)
                return TurnResult(
                    action="extraction-started",
                    robot_utterance=question.text,
                    session_id=session.id,
                )

            current = self._position.get(user, self.tree.root)
            follow = next_topic(
                self.tree,
                self.tree.node(current),
                user,
                self._visited.setdefault(user, set()),
            )
            self._visit(user, follow.topic)
            return TurnResult(
                action="branch-followed",
                robot_utterance=self._node_utterance(user, follow.topic),
                topic=follow.topic,
            )

    # ---- session surface ----

    def start_session(
        self,
        concept: str,
        method: int,
        entity_type: str | None = None,
        user_sentence: str | None = None,
        user: str | None = None,
    ) -> tuple[InsertionSession, Question]:
        with self._lock:
            session, question = insertion.start_session(
                concept,
                method,
                {"entity_type": entity_type, "user_sentence": user_sentence},
                self.ontology,
                self.tree,
                user=user or self.default_user,
            )
            self.store.add(session)
            return session, question

    def answer_session(self, session_id: str, a: Answer) -> dict:
        """Advance a session by one answer; commits on a terminal inserted
        outcome. Raises KeyError for unknown ids, IllegalAnswerError /
        SessionFinishedError for bad input, StaleRevisionError when a commit
        loses the optimistic race."""
        with self._lock:
            session = self.store.get(session_id)
            if session is None:
                raise KeyError(session_id)
            session, _ = insertion.answer(session, a, self.ontology, self.tree, self.nlu)
            if session.outcome == "inserted":
                self.ontology, self.tree = insertion.attach_and_patch(
                    session, self.ontology, self.tree
                )
                if session.collected_sentence:
                    self.ontology.attach_sentence(
                        session.concept, session.collected_sentence, "PS", session.user
                    )
                    self.tree = patch_tree(self.tree, self.ontology, session.concept)
                else:
                    self._awaiting_sentence[session.user] = session.concept
            if session.outcome != "pending":
                self._journal(session)
            return self.session_view(session)

    def _session_utterance(self, session: InsertionSession) -> str:
        """Derived from session state alone, so a reconnecting client sees
        the identical view it would have received in-band."""
        if session.pending is not None:
            return session.pending.text
        if session.outcome == "inserted":
            if session.collected_sentence:
                return f"Thank you! Now I know about {session.concept}."
            return insertion.QUESTION_TEMPLATES["ask-sentence"].format(
                concept=session.concept
            )
        if session.outcome == "declined":
            return f"All right, I will not add {session.concept}."
        if session.outcome == "aborted":
            return "All right, let's talk about something else."
        return ""

    def session_view(self, session: InsertionSession) -> dict:
        question = session.pending
        return {
            "session_id": session.id,
            "concept": session.concept,
            "method": session.method,
            "outcome": session.outcome,
            "question": None
            if question is None
            else {
                "kind": question.kind,
                "text": question.text,
                "subject": question.subject,
                "object": question.object,
            },
            "step_count": session.steps,
            "definition_stack": list(session.definition_stack),
            "inserted": session.inserted,
            "transcript": insertion.transcript_records(session),
            "robot_utterance": self._session_utterance(session),
        }

    # ---- exports ----

    def extract(self, reply: str) -> ExtractionResult:
        return extract_concepts(reply, self.nlu, self.ontology)

    def tree_dump_text(self) -> str:
        return dump_tree_text(self.tree)

    def _journal(self, session: InsertionSession) -> None:
        if self.journal_path is None:
            return
        record = {
            "session_id": session.id,
            "concept": session.concept,
            "method": session.method,
            "outcome": session.outcome,
            "steps": session.steps,
            "inserted": session.inserted,
            "transcript": insertion.transcript_records(session),
        }
        with self.journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def flush(self) -> None:
        """Transcripts are journaled append-only at session end; nothing is
        buffered, so shutdown only needs to log."""
        logger.info("engine shutdown: %d sessions retained", len(self.store.sessions))
