from __future__ import annotations

import pytest

from ontogrow.extraction import (
    ENTITY_PRIORITY,
    classify_outcome,
    extract_concepts,
    run_recognition_eval,
)
from ontogrow.nlu import TaggedUtterance, split_atomic, tag_spans


class TestClassifyOutcome:
    def test_tp_when_tagged_concept_extracted(self):
        # extracted Belgium, tagged Belgium and Norway
        assert classify_outcome({(45, 52)}, {(45, 52), (66, 72)}) == "TP"

    def test_fp_when_only_untagged_concept_extracted(self):
        # only a non-tagged concept was extracted
        assert classify_outcome({(30, 60)}, {(0, 6), (70, 85)}) == "FP"

    def test_tn(self):
        assert classify_outcome(set(), set()) == "TN"

    def test_fn(self):
        assert classify_outcome(set(), {(0, 4)}) == "FN"

    @pytest.mark.parametrize(
        "extracted, tagged, label",
        [
            ({(0, 3)}, {(2, 5)}, "TP"),  # extracted nonempty, overlap
            ({(0, 3)}, {(5, 8)}, "FP"),  # extracted nonempty, no overlap
            ({(0, 3)}, set(), "FP"),  # extracted nonempty, nothing tagged
            (set(), {(5, 8)}, "FN"),  # nothing extracted, tagged
            (set(), set(), "TN"),  # both empty
            ({(0, 3)}, {(3, 6)}, "FP"),  # touching spans do not overlap
        ],
    )
    def test_truth_table_exhaustive(self, extracted, tagged, label):
        assert classify_outcome(extracted, tagged) == label


class TestExtractConcepts:
    def test_multiword_candidate_extracted(self, provider, care_home):
        result = extract_concepts("I grew up playing soccer and tennis", provider, care_home)
        assert result.best is not None
        assert result.best.lemma == "playing soccer"

    def test_standalone_adjective_filtered(self, provider, care_home):
        # slot candidate with no entity overlap must be dropped
        result = extract_concepts("I love shiny", provider, care_home)
        assert result.candidates == ()

    def test_person_beats_location(self, provider, care_home):
        result = extract_concepts(
            "I love Belgium and I love my mother", provider, care_home
        )
        types = [c.entity_type for c in result.candidates]
        assert "PERSON" in types and "LOCATION" in types
        assert result.best.entity_type == "PERSON"
        assert result.best.lemma == "mother"

    def test_known_concepts_dropped(self, provider, care_home):
        # "green tea" is already a class; nothing new to insert
        result = extract_concepts("I like green tea", provider, care_home)
        assert all(c.lemma != "green tea" for c in result.candidates)

    def test_filter_soundness(self, provider, care_home):
        replies = [
            "I love my mother and I was born in Belgium",
            "I love to drink orange juice in the morning",
            "Man, I really enjoy pizza for dinner",
        ]
        for reply in replies:
            result = extract_concepts(reply, provider, care_home)
            mentions = provider.recognize_entities(reply)
            for cand in result.candidates:
                assert any(
                    max(cand.reply_span[0], m.span[0]) < min(cand.reply_span[1], m.span[1])
                    for m in mentions
                )

    def test_ordering_stable_under_priority(self, provider, care_home):
        # both orders of the same two concepts give the same best lemma
        a = extract_concepts("I love Belgium and I love my mother", provider, care_home)
        b = extract_concepts("I love my mother and I love Belgium", provider, care_home)
        assert a.best.lemma == b.best.lemma == "mother"

    def test_priority_table_total_order(self):
        ranks = list(ENTITY_PRIORITY.values())
        assert sorted(ranks) == list(range(len(ranks)))
        assert ENTITY_PRIORITY["PERSON"] < ENTITY_PRIORITY["LOCATION"]
        assert ENTITY_PRIORITY["OTHER"] == max(ranks)


class TestRecognitionEval:
    def test_annotated_replies_labeling(self, provider, care_home, labeled_replies):
        report = run_recognition_eval(labeled_replies, provider, care_home)
        assert [rec.label for rec in report.labels] == [
            "FN", "TP", "TN", "TP", "FP", "TN", "TN", "FN",
        ]
        assert report.matrix.to_dict() == {"tp": 2, "fp": 1, "fn": 2, "tn": 3}

    def test_empty_corpus(self, provider, care_home):
        report = run_recognition_eval([], provider, care_home)
        assert report.matrix.total == 0
        assert report.labels == []

    def test_totals_always_add_up(self, provider, care_home, labeled_replies):
        report = run_recognition_eval(labeled_replies, provider, care_home)
        atoms = sum(len(split_atomic(r.text)) for r in labeled_replies)
        assert report.matrix.total == atoms

    def test_perfect_extraction_has_no_fp_fn(self, provider, care_home):
        # oracle: direct span comparison — every tagged span is exactly a
        # pattern slot backed by a lexicon entity, so extraction is perfect
        texts = [
            ("I love my mother", ["mother"]),
            ("I was born in Belgium", ["Belgium"]),
            ("Man, I really enjoy pizza for dinner", ["pizza"]),
        ]
        corpus = [
            TaggedUtterance(
                intent="preferences", text=t, tags=tag_spans(t, phrases)
            )
            for t, phrases in texts
        ]
        report = run_recognition_eval(corpus, provider, care_home)
        assert report.matrix.fp == 0 and report.matrix.fn == 0
        assert report.matrix.tp == len(texts)

    def test_per_intent_breakdown(self, provider, care_home, labeled_replies):
        report = run_recognition_eval(labeled_replies, provider, care_home)
        assert set(report.per_intent) == {"memories-past"}
        assert report.per_intent["memories-past"].total == report.matrix.total

    def test_report_dict_shape(self, provider, care_home, labeled_replies):
        doc = run_recognition_eval(labeled_replies, provider, care_home).to_dict()
        assert set(doc) == {"counts", "per_intent", "labels"}
        assert set(doc["counts"]) == {"tp", "fp", "fn", "tn"}
        assert all(
            {"reply_id", "ordinal", "label", "intent", "extracted", "tagged"} <= set(rec)
            for rec in doc["labels"]
        )
