"""Deterministic local language understanding.

The production system this package grew out of delegated these functions to
hosted services; here the normative implementation is a local one so the
whole pipeline is reproducible offline. External services can be wrapped as
adapters satisfying :class:`NluProvider`; the conformance suite targets the
interface, not this implementation.

Provider wire schema (for out-of-process adapters, JSON bodies):
  split_atomic        {"reply": str} -> [{"text", "start", "end", "ordinal"}]
  match_intent        {"text": str}  -> {"intent": str, "slots": [[s, e]]} | null
  recognize_entities  {"text": str}  -> [{"text", "start", "end", "entity_type"}]
  classify_content    {"text": str}  -> [{"path", "confidence"}]
  lemmatize           {"phrase": str} -> {"lemma": str}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Protocol

from .errors import EmptyCorpusError
from .text import FUNCTION_WORDS, fold, lemmatize, noun_like, tokenize

MAX_ATOMIC_CHARS = 256
SLOT = "<slot>"
MAX_SLOT_TOKENS = 5
MIN_MATCH_SCORE = 2  # literal tokens a winning pattern must contribute

INTENTS = ("memories-past", "preferences", "norms", "beliefs", "definition")

ENTITY_TYPES = (
    "PERSON",
    "LOCATION",
    "ORGANIZATION",
    "EVENT",
    "WORK_OF_ART",
    "CONSUMER_GOOD",
    "FOOD_AND_BEVERAGES",
    "OTHER",
)

# Suffix heuristic for capitalized tokens that are not sentence-initial.
_LOCATION_SUFFIXES = ("land", "ia", "ville", "burg", "ton", "shire", "stan")


@dataclass(frozen=True)
class AtomicSentence:
    """One piece of a user reply: the unit of extraction and labeling."""

    text: str
    source_span: tuple[int, int]
    ordinal: int

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("atomic sentence text must be nonempty")
        if len(self.text) > MAX_ATOMIC_CHARS:
            raise ValueError(f"atomic sentence exceeds {MAX_ATOMIC_CHARS} characters")


@dataclass(frozen=True)
class TaggedUtterance:
    intent: str
    text: str
    tags: tuple[tuple[int, int], ...] = ()
    question_id: str = ""

    def __post_init__(self):
        if self.intent not in INTENTS:
            raise ValueError(f"unknown intent {self.intent!r}")
        last_end = 0
        for start, end in self.tags:
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"tag span ({start}, {end}) out of bounds")
            if start < last_end:
                raise ValueError("tag spans must be sorted and non-overlapping")
            if not tokenize(self.text[start:end]):
                raise ValueError(f"tag span ({start}, {end}) covers no word")
            last_end = end


@dataclass(frozen=True)
class EntityMention:
    text: str
    span: tuple[int, int]
    entity_type: str

    def __post_init__(self):
        if self.entity_type not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {self.entity_type!r}")


@dataclass(frozen=True)
class ContentCategory:
    path: str
    confidence: float

    def __post_init__(self):
        if not self.path:
            raise ValueError("category path must be nonempty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class IntentModel:
    """Token-sequence patterns per intent; tagged spans become slot
    wildcards matching 1..5 consecutive non-function-word tokens."""

    patterns: dict[str, tuple[tuple[str, ...], ...]]
    trained_from: str  # corpus checksum

    def total_patterns(self) -> int:
        return sum(len(p) for p in self.patterns.values())


# ---- splitting ----

def _find_delimiters(reply: str) -> list[tuple[int, int]]:
    return [(s, e) for tok, s, e in tokenize(reply) if tok == "and"]


def _cap_piece(piece: str, offset: int) -> list[tuple[int, int]]:
    """Split an overlong raw piece at the last whitespace at or before the
    cap, repeatedly; falls back to a hard cut when there is none."""
    spans = []
    start = 0
    while len(piece) - start > MAX_ATOMIC_CHARS:
        window = piece[start : start + MAX_ATOMIC_CHARS + 1]
        cut = max(
            (i for i, ch in enumerate(window) if ch.isspace() and i <= MAX_ATOMIC_CHARS),
            default=-1,
        )
        if cut <= 0:
            cut = MAX_ATOMIC_CHARS
        spans.append((offset + start, offset + start + cut))
        start += cut
    spans.append((offset + start, offset + len(piece)))
    return spans


def split_atomic(reply: str) -> list[AtomicSentence]:
    """Split a reply at each standalone "and" (case-insensitive, word
    boundary), then cap any remaining piece at 256 characters by cutting at
    the last whitespace at or before the cap. Delimiters are dropped;
    whitespace-only pieces are dropped; order is preserved."""
    segments = []
    cursor = 0
    for start, end in _find_delimiters(reply):
        segments.append((cursor, start))
        cursor = end
    segments.append((cursor, len(reply)))

    pieces = []
    for seg_start, seg_end in segments:
        raw = reply[seg_start:seg_end]
        if not raw.strip():
            continue
        pieces.extend(_cap_piece(raw, seg_start))

    atoms = []
    for start, end in pieces:
        text = reply[start:end]
        stripped = text.strip()
        if not stripped:
            continue
        lead = len(text) - len(text.lstrip())
        atoms.append(
            AtomicSentence(
                text=stripped,
                source_span=(start + lead, start + lead + len(stripped)),
                ordinal=len(atoms),
            )
        )
    return atoms


# ---- intent training and matching ----

def _utterance_pattern(utt: TaggedUtterance) -> tuple[str, ...]:
    tokens = tokenize(utt.text)
    elements: list[str] = []
    tag_index = 0
    in_slot = False
    for tok, start, end in tokens:
        while tag_index < len(utt.tags) and utt.tags[tag_index][1] <= start:
            tag_index += 1
            in_slot = False
        if tag_index < len(utt.tags):
            t_start, t_end = utt.tags[tag_index]
            if start < t_end and end > t_start:
                if not in_slot:
                    elements.append(SLOT)
                    in_slot = True
                continue
        in_slot = False
        elements.append(tok)
    return tuple(elements)


def train_intents(corpus: list[TaggedUtterance]) -> IntentModel:
    """Generalize tagged utterances into slot patterns.

    Deterministic and order-independent: patterns are deduplicated and
    sorted, and the checksum is computed over the sorted canonical corpus.
    Patterns without a single literal token are discarded (they could never
    reach the score threshold).
    """
    if not corpus:
        raise EmptyCorpusError("cannot train on an empty corpus")
    by_intent: dict[str, set[tuple[str, ...]]] = {}
    for utt in corpus:
        pattern = _utterance_pattern(utt)
        if not any(el != SLOT for el in pattern):
            continue
        by_intent.setdefault(utt.intent, set()).add(pattern)
    canonical = sorted(
        json.dumps({"intent": u.intent, "text": u.text, "tags": list(u.tags)}, sort_keys=True)
        for u in corpus
    )
    checksum = hashlib.sha256("\n".join(canonical).encode("utf-8")).hexdigest()
    return IntentModel(
        patterns={i: tuple(sorted(p)) for i, p in sorted(by_intent.items())},
        trained_from=checksum,
    )


def _literal_count(pattern: tuple[str, ...]) -> int:
    return sum(1 for el in pattern if el != SLOT)


def _align(
    pattern: tuple[str, ...],
    tokens: list[tuple[str, int, int]],
    p: int,
    t: int,
) -> list[tuple[int, int]] | None:
    """Align pattern elements onto tokens starting at index t; contiguous,
    right-unanchored. Returns slot fills as (first, last) token indexes."""
    if p == len(pattern):
        return []
    if pattern[p] != SLOT:
        if t < len(tokens) and tokens[t][0] == pattern[p]:
            rest = _align(pattern, tokens, p + 1, t + 1)
            if rest is not None:
                return rest
        return None
    trailing = p == len(pattern) - 1
    max_len = min(MAX_SLOT_TOKENS, len(tokens) - t)
    lengths = range(max_len, 0, -1) if trailing else range(1, max_len + 1)
    for length in lengths:
        extent = tokens[t : t + length]
        if any(tok in FUNCTION_WORDS for tok, _, _ in extent):
            continue  # a shorter clean extent may still exist when trailing
        rest = _align(pattern, tokens, p + 1, t + length)
        if rest is not None:
            return [(t, t + length - 1)] + rest
    return None


def match_intent(
    model: IntentModel,
    atomic: AtomicSentence,
    intents: tuple[str, ...] | None = None,
) -> tuple[str, list[tuple[int, int]]] | None:
    """Match the highest-scoring pattern against the atomic sentence.

    Score is the count of matched literal tokens; ties prefer the pattern
    with more literal tokens, then the lexicographically smaller intent
    name. Returns the winning intent and the slot fillers as character
    spans of the atomic sentence, or None when no pattern reaches the
    score threshold. A slot absorbs one to five consecutive tokens and
    never crosses a function word.
    """
    tokens = tokenize(atomic.text)
    best = None  # (score, literals, intent, pattern) with spans
    for intent, patterns in model.patterns.items():
        if intents is not None and intent not in intents:
            continue
        for pattern in patterns:
            fills = None
            for start in range(len(tokens)):
                fills = _align(pattern, tokens, 0, start)
                if fills is not None:
                    break
            if fills is None:
                continue
            score = _literal_count(pattern)
            if score < MIN_MATCH_SCORE:
                continue
            key = (-score, -_literal_count(pattern), intent, pattern)
            if best is None or key < best[0]:
                spans = [
                    (tokens[first][1], tokens[last][2]) for first, last in fills
                ]
                best = (key, intent, spans)
    if best is None:
        return None
    return best[1], best[2]


# ---- entities and categories ----

def load_entity_lexicon(source: str | dict) -> dict[tuple[str, ...], str]:
    """Flat word-or-phrase -> entity type object, folded for lookup."""
    raw = json.loads(source) if isinstance(source, str) else source
    lexicon = {}
    for phrase, entity_type in raw.items():
        if entity_type not in ENTITY_TYPES:
            raise ValueError(f"entity lexicon: unknown type {entity_type!r} for {phrase!r}")
        lexicon[tuple(fold(w) for w in phrase.split())] = entity_type
    return lexicon


def recognize_entities(
    text: str, lexicon: dict[tuple[str, ...], str] | None = None
) -> list[EntityMention]:
    """Gazetteer-first noun spotting with a closed heuristic fallback.

    Longest gazetteer phrase wins at each position; uncovered capitalized
    non-initial tokens become PERSON (or LOCATION by suffix); uncovered
    noun-like tokens become OTHER. Spans are disjoint and sorted.
    """
    lexicon = lexicon or {}
    tokens = tokenize(text)
    folded = [fold(tok) for tok, _, _ in tokens]
    mentions: list[EntityMention] = []
    max_phrase = max((len(k) for k in lexicon), default=0)
    i = 0
    while i < len(tokens):
        matched = 0
        for length in range(min(max_phrase, len(tokens) - i), 0, -1):
            entity_type = lexicon.get(tuple(folded[i : i + length]))
            if entity_type is not None:
                start, end = tokens[i][1], tokens[i + length - 1][2]
                mentions.append(EntityMention(text[start:end], (start, end), entity_type))
                matched = length
                break
        if matched:
            i += matched
            continue
        tok, start, end = tokens[i]
        raw = text[start:end]
        if i > 0 and raw[:1].isupper():
            kind = "LOCATION" if tok.endswith(_LOCATION_SUFFIXES) else "PERSON"
            mentions.append(EntityMention(raw, (start, end), kind))
        elif noun_like(tok):
            mentions.append(EntityMention(raw, (start, end), "OTHER"))
        i += 1
    return mentions


@dataclass(frozen=True)
class CategoryRule:
    keywords: tuple[str, ...]
    category: str


def load_category_rules(source: str | list) -> list[CategoryRule]:
    raw = json.loads(source) if isinstance(source, str) else source
    rules = []
    for rec in raw:
        rules.append(
            CategoryRule(tuple(fold(k) for k in rec["keywords"]), rec["category"])
        )
    return rules


def classify_content(text: str, rules: list[CategoryRule] | None = None) -> list[ContentCategory]:
    """Authored keyword rules; confidence is the matched-keyword fraction.
    Returns nothing when no rule keyword appears in the text."""
    present = {fold(w) for w in (tok for tok, _, _ in tokenize(text))}
    results = []
    for rule in rules or []:
        matched = sum(1 for kw in rule.keywords if kw in present)
        if matched:
            results.append(ContentCategory(rule.category, matched / len(rule.keywords)))
    return sorted(results, key=lambda c: (-c.confidence, c.path))


# ---- corpus I/O ----

def load_tagged_corpus(text: str) -> list[TaggedUtterance]:
    """Line-delimited records {question_id, intent, text, tags:[{start,end}]}."""
    corpus = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"corpus line {line_no}: invalid JSON: {exc}") from exc
        corpus.append(
            TaggedUtterance(
                intent=rec["intent"],
                text=rec["text"],
                tags=tuple((t["start"], t["end"]) for t in rec.get("tags", [])),
                question_id=str(rec.get("question_id", "")),
            )
        )
    return corpus


def tag_spans(text: str, phrases: list[str]) -> tuple[tuple[int, int], ...]:
    """Helper to build tag spans from literal phrases, in order of appearance."""
    spans = []
    cursor = 0
    for phrase in phrases:
        idx = text.index(phrase, cursor)
        spans.append((idx, idx + len(phrase)))
        cursor = idx + len(phrase)
    return tuple(sorted(spans))


# ---- provider interface ----

class NluProvider(Protocol):
    """Any component implementing the five run-time operations. Adapters for
    remote services must satisfy the same postconditions; the conformance
    suite runs against this interface."""

    def split_atomic(self, reply: str) -> list[AtomicSentence]: ...

    def match_intent(
        self, atomic: AtomicSentence, intents: tuple[str, ...] | None = None
    ) -> tuple[str, list[tuple[int, int]]] | None: ...

    def recognize_entities(self, text: str) -> list[EntityMention]: ...

    def classify_content(self, text: str) -> list[ContentCategory]: ...

    def lemmatize(self, phrase: str) -> str: ...


@dataclass
class LocalNluProvider:
    """The normative in-process provider, backed by authored lexicons."""

    model: IntentModel
    entity_lexicon: dict[tuple[str, ...], str] = field(default_factory=dict)
    category_rules: list[CategoryRule] = field(default_factory=list)

    def split_atomic(self, reply: str) -> list[AtomicSentence]:
        return split_atomic(reply)

    def match_intent(
        self, atomic: AtomicSentence, intents: tuple[str, ...] | None = None
    ) -> tuple[str, list[tuple[int, int]]] | None:
        return match_intent(self.model, atomic, intents)

    def recognize_entities(self, text: str) -> list[EntityMention]:
        return recognize_entities(text, self.entity_lexicon)

    def classify_content(self, text: str) -> list[ContentCategory]:
        return classify_content(text, self.category_rules)

    def lemmatize(self, phrase: str) -> str:
        return lemmatize(phrase)
