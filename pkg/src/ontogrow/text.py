"""Tokenization, lemmatization and word lists shared across the pipeline.

Everything here is deterministic table-plus-suffix-rule machinery; there is
no statistical model anywhere in the package.
"""
from __future__ import annotations

import re

# Tokens are runs of letters/digits, optionally with an inner apostrophe
# ("don't" stays one token).
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:'[A-Za-z0-9]+)*")

# Closed class of words that never form part of an extracted concept.
FUNCTION_WORDS = frozenset("""
    a an the
    i you he she it we they me him her us them
    my your his its our their mine yours hers ours theirs
    this that these those who whom whose what which
    in on at to from of with by for about into over under near
    until since through between during against across behind after before
    and or but so because although while when if than as then there here
    is am are was were be been being
    do does did done have has had having
    will would can could shall should may might must
    not no yes nor
    very really quite just also too only even still yet again
    lot lots much many some any all both each every few more most
    other another such same own several rather
    up down out off
""".split())

# Common adjectives/verb-forms that the entity heuristic must not type as
# nouns (keeps "a standalone adjective" from becoming a candidate).
NON_ENTITY_WORDS = frozenset("""
    good great nice bad fine happy sad big small little large old young new
    early late long short high low easy hard difficult troubled mixed
    favourite favorite important interesting beautiful deadly healthy
    shiny bright dark warm cold hot cool soft loud quiet fast slow
    second third oldest youngest best worst better worse different
    became become becomes grew grow moved move split born
    think thought believe love like enjoy hate went go said say
    tell told know knew feel felt met meet visited visit made make
    gave give took take came come looked look wanted want
""".split())

# Words that normalize an answer to "stop" regardless of phrasing.
STOP_PHRASES = frozenset({
    "stop", "i don't know", "i dont know", "i do not know", "no idea",
})

YES_WORDS = frozenset({"yes", "y", "yeah", "yep", "sure", "ok", "okay", "correct"})
NO_WORDS = frozenset({"no", "n", "nope", "nah"})

# Irregular plurals plus the -ies words that are really -ie + s.
_IRREGULAR_LEMMAS = {
    "children": "child",
    "men": "man",
    "women": "woman",
    "people": "person",
    "mice": "mouse",
    "feet": "foot",
    "teeth": "tooth",
    "geese": "goose",
    "oxen": "ox",
    "wives": "wife",
    "lives": "life",
    "knives": "knife",
    "leaves": "leaf",
    "shelves": "shelf",
    "wolves": "wolf",
    "halves": "half",
    "movies": "movie",
    "cookies": "cookie",
    "ties": "tie",
    "pies": "pie",
    "quizzes": "quiz",
}

# Singulars that happen to end in s; never stripped.
_NO_STRIP = frozenset({
    "news", "tennis", "analysis", "basis", "crisis", "bus", "gas",
    "glass", "class", "grass", "chess", "princess", "business",
    "status", "cactus", "campus", "virus", "chaos", "series", "species",
})


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Return (lowercased token, start, end) triples in order of appearance."""
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def words(text: str) -> list[str]:
    return [tok for tok, _, _ in tokenize(text)]


def _lemmatize_token(token: str) -> str:
    word = token.lower()
    if word in _IRREGULAR_LEMMAS:
        return _IRREGULAR_LEMMAS[word]
    if word in _NO_STRIP or len(word) <= 3:
        return word
    if word.endswith("ies") and len(word) >= 5:
        return word[:-3] + "y"
    if word.endswith(("sses", "shes", "ches", "xes", "zes")):
        return word[:-2]
    if word.endswith("oes") and len(word) >= 5:
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def lemmatize(phrase: str) -> str:
    """Lowercase a phrase and lemmatize its head noun (the last token).

    Non-head tokens are preserved as-is apart from case folding, so
    "swimming pools" becomes "swimming pool". Idempotent by construction.
    """
    tokens = words(phrase)
    if not tokens:
        return ""
    return " ".join(tokens[:-1] + [_lemmatize_token(tokens[-1])])


def fold(phrase: str) -> str:
    """Canonical comparison key: lemmatized, case-folded, single-spaced."""
    return lemmatize(phrase)


def is_stop_phrase(text: str) -> bool:
    return " ".join(words(text)) in {" ".join(words(p)) for p in STOP_PHRASES}


def noun_like(token: str) -> bool:
    """Heuristic used by the entity fallback: plausible bare noun?"""
    word = token.lower()
    if len(word) < 3 or not word.isalpha():
        return False
    if word in FUNCTION_WORDS or word in NON_ENTITY_WORDS:
        return False
    if word.endswith("ly") or word.endswith("ing"):
        return False
    return True
