from __future__ import annotations

import json

import pytest

from ontogrow.engine import Engine
from ontogrow.insertion import Answer
from ontogrow.tree import trigger_topic


@pytest.fixture()
def engine(care_home, provider):
    return Engine(care_home, provider, method_policy=3)


ORANGE_JUICE_ANSWERS = [
    Answer("free-text", "It is a kind of juice"),
    Answer("free-text", "It is a beverage"),
    Answer("yes"),  # juice is a kind of beverage
    Answer("no"), Answer("no"), Answer("no"),  # not coffee / milk / tea
    Answer("yes"),  # add juice under beverage
    Answer("yes"),  # add orange juice under juice
]


class TestTurns:
    def test_wife_triggers_topic(self, engine):
        result = engine.handle_user_turn("I want to talk about my wife")
        assert result.action == "topic-triggered"
        assert result.topic == "Wife"

    def test_extraction_starts_session(self, engine):
        result = engine.handle_user_turn("I love to drink orange juice in the morning")
        assert result.action == "extraction-started"
        assert result.session_id is not None
        assert "orange juice" in result.robot_utterance

    def test_empty_sentence_is_nothing_with_fallback(self, engine):
        result = engine.handle_user_turn("   ")
        assert result.action == "nothing"
        assert result.robot_utterance

    def test_unmatched_sentence_follows_branch(self, engine):
        result = engine.handle_user_turn("zz qq pp unrecognizable blather")
        assert result.action == "branch-followed"
        assert result.topic is not None

    def test_method_policy_list_skips_unmapped_method2(self, care_home, provider):
        engine = Engine(care_home, provider, method_policy=[2, 3])
        result = engine.handle_user_turn("I grew up playing soccer and tennis")
        assert result.action == "extraction-started"
        session = engine.store.get(result.session_id)
        assert session.method == 2  # EVENT is mapped on this fixture

    def test_utterances_round_robin_per_node(self, engine):
        first = engine.handle_user_turn("I love espresso so much")
        second = engine.handle_user_turn("I love espresso so much")
        third = engine.handle_user_turn("I love espresso so much")
        assert first.topic == second.topic == "Espresso"
        assert first.robot_utterance == "Do you like Espresso?"
        assert second.robot_utterance != first.robot_utterance
        assert third.robot_utterance == first.robot_utterance  # cycled back


class TestSessionLifecycle:
    def test_full_method3_conversation(self, engine):
        started = engine.handle_user_turn("I love to drink orange juice in the morning")
        sid = started.session_id
        view = None
        for a in ORANGE_JUICE_ANSWERS:
            view = engine.answer_session(sid, a)
        assert view["outcome"] == "inserted"
        assert view["inserted"] == ["juice", "orange juice"]
        assert view["step_count"] == 7
        # the robot now asks for a sentence about the new concept (2.c)
        assert "tell me a sentence about orange juice" in view["robot_utterance"].lower()

        follow = engine.handle_user_turn("Orange juice is refreshing on hot days")
        assert follow.action == "branch-followed"
        instances = engine.ontology.instances_of("orange juice")
        assert any(
            "Orange juice is refreshing on hot days" in i.sentences for i in instances
        )

        node = trigger_topic(engine.tree, "orange juice")
        assert node is not None and node.topic == "orange juice"
        turn = engine.handle_user_turn("can we talk about orange juice please")
        assert turn.action == "topic-triggered"
        assert turn.topic == "orange juice"

    def test_insertion_visible_in_tree_dump(self, engine):
        started = engine.handle_user_turn("I love to drink orange juice in the morning")
        for a in ORANGE_JUICE_ANSWERS:
            engine.answer_session(started.session_id, a)
        dump = json.loads(engine.tree_dump_text())
        topics = {n["topic"] for n in dump["nodes"]}
        assert {"juice", "orange juice"} <= topics

    def test_definition_stack_in_view(self, engine):
        started = engine.handle_user_turn("I love to drink orange juice in the morning")
        view = engine.answer_session(started.session_id, ORANGE_JUICE_ANSWERS[0])
        assert view["definition_stack"] == ["orange juice", "juice"]

    def test_declined_session(self, engine):
        session, _ = engine.start_session("gizmo", 1)
        for a in [Answer("no")] * 7:  # refuse every root child
            view = engine.answer_session(session.id, a)
        view = engine.answer_session(session.id, Answer("no"))  # refuse the attach
        assert view["outcome"] == "declined"
        assert "gizmo" not in engine.ontology.classes

    def test_unknown_session(self, engine):
        with pytest.raises(KeyError):
            engine.answer_session("nope", Answer("yes"))

    def test_method4_collected_sentence_attached_on_commit(self, engine):
        session, _ = engine.start_session("disease", 4)
        engine.answer_session(
            session.id, Answer("free-text", "Infectious diseases can sometimes be deadly")
        )
        engine.answer_session(session.id, Answer("yes"))  # accept HavingHealthProblems
        view = engine.answer_session(session.id, Answer("yes"))  # leaf attach
        assert view["outcome"] == "inserted"
        instances = engine.ontology.instances_of("disease")
        assert any("Infectious diseases" in s for i in instances for s in i.sentences)

    def test_journal_written(self, care_home, provider, tmp_path):
        journal = tmp_path / "journal.jsonl"
        engine = Engine(care_home, provider, journal_path=journal)
        session, _ = engine.start_session("orange juice", 3)
        for a in ORANGE_JUICE_ANSWERS:
            engine.answer_session(session.id, a)
        lines = journal.read_text().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["outcome"] == "inserted"
        assert record["concept"] == "orange juice"

    def test_purge(self, engine):
        session, _ = engine.start_session("gizmo", 1)
        assert engine.store.purge(session.id)
        assert engine.store.get(session.id) is None
