from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from ontogrow.nlu import (
    LocalNluProvider,
    load_category_rules,
    load_entity_lexicon,
    load_tagged_corpus,
    train_intents,
)
from ontogrow.ontology import load_ontology


def data_text(name: str) -> str:
    return resources.files("ontogrow").joinpath("data", name).read_text(encoding="utf-8")


def data_path(name: str) -> Path:
    return Path(str(resources.files("ontogrow").joinpath("data", name)))


@pytest.fixture()
def beverages():
    return load_ontology(data_text("beverages.json"))


@pytest.fixture()
def care_home():
    return load_ontology(data_text("care_home.json"))


@pytest.fixture(scope="session")
def intent_model():
    return train_intents(load_tagged_corpus(data_text("intent_corpus.jsonl")))


@pytest.fixture(scope="session")
def provider(intent_model):
    return LocalNluProvider(
        model=intent_model,
        entity_lexicon=load_entity_lexicon(data_text("entity_lexicon.json")),
        category_rules=load_category_rules(data_text("category_rules.json")),
    )


@pytest.fixture(scope="session")
def labeled_replies():
    return load_tagged_corpus(data_text("labeled_replies.jsonl"))


@pytest.fixture(scope="session")
def eval_nouns():
    import csv

    with data_path("eval_nouns.csv").open(newline="", encoding="utf-8") as fh:
        return [
            (row["noun"], row["target_parent"], row["entity_type"])
            for row in csv.DictReader(fh)
        ]


@pytest.fixture(scope="session")
def eval_scripts():
    return json.loads(data_text("eval_scripts.json"))
