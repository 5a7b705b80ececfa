from __future__ import annotations

import itertools
import json

import pytest

from ontogrow.errors import (
    DuplicateConceptError,
    EmptySentenceError,
    OntologyIntegrityError,
    OntologyParseError,
    UnknownClassError,
)
from ontogrow.ontology import (
    LIKELINESS_SCALE,
    LikelinessValue,
    load_ontology,
    serialize_ontology,
)


def minimal_doc(**overrides):
    doc = {
        "classes": [{"name": "Topic", "display_name": "Topic", "keywords": [],
                     "categories": [], "templates": []}],
        "instances": [],
        "synonyms": {},
        "entity_type_map": {},
        "category_map": {},
    }
    doc.update(overrides)
    return doc


class TestLoad:
    def test_beverages_fixture(self, beverages):
        assert len(beverages.classes) >= 7
        assert beverages.classes["Coffee"].parent == "Beverage"
        assert beverages.classes["GreenTea"].parent == "Tea"
        assert "EN_MILK" in beverages.instances["EN_TEA"].topic_links
        assert beverages.revision == 0

    def test_root_only(self):
        onto = load_ontology(json.dumps(minimal_doc()))
        assert list(onto.classes) == ["Topic"]

    def test_cycle_detected(self):
        doc = minimal_doc()
        doc["classes"] += [
            {"name": "X", "display_name": "X", "parent": "Y", "keywords": [], "categories": [], "templates": []},
            {"name": "Y", "display_name": "Y", "parent": "X", "keywords": [], "categories": [], "templates": []},
        ]
        with pytest.raises(OntologyIntegrityError) as err:
            load_ontology(json.dumps(doc))
        assert "cycle" in str(err.value)

    def test_unknown_keys_rejected(self):
        doc = minimal_doc()
        doc["wibble"] = 1
        with pytest.raises(OntologyParseError):
            load_ontology(json.dumps(doc))
        doc = minimal_doc()
        doc["classes"][0]["hue"] = "red"
        with pytest.raises(OntologyParseError):
            load_ontology(json.dumps(doc))

    def test_malformed_json(self):
        with pytest.raises(OntologyParseError):
            load_ontology("{not json")

    def test_dangling_parent_names_element(self):
        doc = minimal_doc()
        doc["classes"].append(
            {"name": "Lost", "display_name": "Lost", "parent": "Nowhere",
             "keywords": [], "categories": [], "templates": []}
        )
        with pytest.raises(OntologyIntegrityError) as err:
            load_ontology(json.dumps(doc))
        assert "Lost" in str(err.value) or "Nowhere" in str(err.value)

    def test_duplicate_class_rejected(self):
        doc = minimal_doc()
        doc["classes"].append(dict(doc["classes"][0]))
        with pytest.raises(OntologyIntegrityError):
            load_ontology(json.dumps(doc))

    def test_cs_instance_requires_culture(self):
        doc = minimal_doc()
        doc["instances"].append(
            {"id": "X", "class": "Topic", "layer": "CS", "sentences": [],
             "likeliness": "Medium", "topic_links": []}
        )
        with pytest.raises(OntologyIntegrityError):
            load_ontology(json.dumps(doc))


class TestRoundTrip:
    def test_serialize_load_identity(self, care_home):
        doc = serialize_ontology(care_home)
        again = load_ontology(json.dumps(doc))
        assert serialize_ontology(again) == doc
        assert list(again.classes) == list(care_home.classes)
        for name, cls in care_home.classes.items():
            assert again.classes[name] == cls
        for iid, inst in care_home.instances.items():
            assert again.instances[iid] == inst
        assert again.synonyms == care_home.synonyms


class TestInsertClass:
    def test_insert_under_beverage(self, beverages):
        beverages.insert_class("orange juice", "Beverage")
        assert beverages.classes["orange juice"].parent == "Beverage"
        assert beverages.revision == 1

    def test_duplicate_rejected(self, beverages):
        with pytest.raises(DuplicateConceptError):
            beverages.insert_class("Tea", "Beverage")

    def test_duplicate_by_lemma_and_case(self, beverages):
        with pytest.raises(DuplicateConceptError):
            beverages.insert_class("teas", "Beverage")
        with pytest.raises(DuplicateConceptError):
            beverages.insert_class("GREEN TEA", "Beverage")

    def test_duplicate_by_synonym(self, beverages):
        with pytest.raises(DuplicateConceptError):
            beverages.insert_class("drink", "Topic")

    def test_unknown_parent(self, beverages):
        with pytest.raises(UnknownClassError):
            beverages.insert_class("orange juice", "Juice")

    def test_chain_insert(self, beverages):
        beverages.insert_class("juice", "Beverage")
        beverages.insert_class("orange juice", "juice")
        assert beverages.ancestors("orange juice") == ["juice", "Beverage", "Topic"]
        assert beverages.revision == 2

    def test_children_order_appends(self, beverages):
        before = [c.name for c in beverages.children_of("Beverage")]
        beverages.insert_class("orange juice", "Beverage")
        after = [c.name for c in beverages.children_of("Beverage")]
        assert after == before + ["orange juice"]

    def test_integrity_after_mutations(self, beverages):
        beverages.insert_class("juice", "Beverage")
        beverages.attach_sentence("juice", "Freshly squeezed, please.", "PS", "u1")
        beverages.check_integrity()


class TestAttachSentence:
    def test_creates_instance(self, beverages):
        iid = beverages.attach_sentence(
            "Tea", "An orange a day keeps the doctor away!", "PS", "u1"
        )
        inst = beverages.instances[iid]
        assert inst.layer == "PS" and inst.user == "u1"
        assert len(inst.sentences) == 1
        assert beverages.revision == 1

    def test_appends_to_same_instance(self, beverages):
        first = beverages.attach_sentence("Tea", "one", "PS", "u1")
        second = beverages.attach_sentence("Tea", "two", "PS", "u1")
        assert first == second
        assert beverages.instances[first].sentences == ["one", "two"]

    def test_unknown_class(self, beverages):
        with pytest.raises(UnknownClassError):
            beverages.attach_sentence("xyzzy", "hello", "PS", "u1")

    def test_empty_sentence(self, beverages):
        with pytest.raises(EmptySentenceError):
            beverages.attach_sentence("Tea", "   ", "PS", "u1")


class TestLookups:
    def test_map_entity_type(self, care_home):
        assert care_home.map_entity_type("FOOD_AND_BEVERAGES") == "FoodOrBeverage"
        assert care_home.map_entity_type("OTHER") is None
        assert care_home.map_entity_type("XENOTYPE") is None

    def test_classes_for_categories_single_path(self, care_home):
        got = care_home.classes_for_categories(["Health/Health Conditions/Infectious"])
        assert got == ["HavingHealthProblems"]

    def test_classes_for_categories_empty(self, care_home):
        assert care_home.classes_for_categories([]) == []

    def test_category_ordering_brute_force(self):
        # oracle: exhaustive sort over every permutation of a 3-class fixture
        doc = minimal_doc()
        doc["classes"] += [
            {"name": "A", "display_name": "A", "parent": "Topic", "keywords": [],
             "categories": ["x", "y"], "templates": []},
            {"name": "B", "display_name": "B", "parent": "A", "keywords": [],
             "categories": ["x"], "templates": []},
            {"name": "C", "display_name": "C", "parent": "Topic", "keywords": [],
             "categories": ["y", "z"], "templates": []},
        ]
        onto = load_ontology(json.dumps(doc))

        def oracle(cats):
            scored = []
            for name in onto.classes:
                shared = len(set(cats) & set(onto.classes[name].categories))
                if shared:
                    scored.append((name, shared, onto.depth(name)))
            best = sorted(scored, key=lambda t: (-t[1], t[2], t[0]))
            return [name for name, _, _ in best]

        for cats in itertools.chain.from_iterable(
            itertools.permutations(["x", "y", "z"], k) for k in range(0, 4)
        ):
            assert onto.classes_for_categories(list(cats)) == oracle(list(cats))

    def test_two_vs_one_shared_category(self):
        doc = minimal_doc()
        doc["classes"] += [
            {"name": "One", "display_name": "One", "parent": "Topic", "keywords": [],
             "categories": ["x"], "templates": []},
            {"name": "Two", "display_name": "Two", "parent": "Topic", "keywords": [],
             "categories": ["x", "y"], "templates": []},
        ]
        onto = load_ontology(json.dumps(doc))
        assert onto.classes_for_categories(["x", "y"]) == ["Two", "One"]


class TestSynonyms:
    def test_lookup(self, beverages):
        assert beverages.lookup_synonyms("beverage") == ["drink"]
        assert beverages.lookup_synonyms("xyzzy") == []

    def test_symmetric_closure(self, beverages):
        # oracle: brute-force closure over the raw entries
        assert beverages.lookup_synonyms("drink") == ["beverage"]
        for word in ("beverage", "drink"):
            for syn in beverages.lookup_synonyms(word):
                assert word in beverages.lookup_synonyms(syn)

    def test_excludes_query_word(self, care_home):
        for word in ("thing", "topic", "person", "human"):
            assert word not in care_home.lookup_synonyms(word)


def test_likeliness_fixed_map():
    assert LIKELINESS_SCALE == {
        "VeryLow": 0.1, "Low": 0.3, "Medium": 0.5, "High": 0.7, "VeryHigh": 0.9,
    }
    assert LikelinessValue("High").numeric == 0.7
    with pytest.raises(ValueError):
        LikelinessValue("Sometimes")
