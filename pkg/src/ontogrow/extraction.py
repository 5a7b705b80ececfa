"""Concept extraction pipeline and per-atomic-sentence outcome labeling.

Extraction mirrors the production recognition flow: the reply is split
into atomic pieces, each piece is matched against the trained intent
patterns, and a slot filler survives only when it overlaps a noun the
entity recognizer found in the *whole* reply. Surviving candidates are
ranked by entity-type priority; already-known concepts are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .nlu import (
    IntentModel,
    LocalNluProvider,
    NluProvider,
    TaggedUtterance,
)
from .ontology import Ontology
from .stats import ConfusionMatrix
from .text import lemmatize

# Lower rank = higher priority. Only the PERSON > LOCATION relation is
# externally fixed; the rest of the order is a stable convention.
ENTITY_PRIORITY = {
    "PERSON": 0,
    "LOCATION": 1,
    "ORGANIZATION": 2,
    "EVENT": 3,
    "WORK_OF_ART": 4,
    "CONSUMER_GOOD": 5,
    "FOOD_AND_BEVERAGES": 6,
    "OTHER": 7,
}

# The definition intent is dedicated to the insertion dialogue and does not
# participate in open extraction.
EXTRACTION_INTENTS = ("memories-past", "preferences", "norms", "beliefs")

OUTCOME_LABELS = ("TP", "FP", "FN", "TN")


@dataclass(frozen=True)
class CandidateConcept:
    text: str
    atomic_ordinal: int
    entity_type: str
    priority: int
    lemma: str
    span: tuple[int, int]  # within the atomic sentence
    reply_span: tuple[int, int]  # within the whole reply
    intent: str


@dataclass(frozen=True)
class ExtractionResult:
    candidates: tuple[CandidateConcept, ...] = ()

    @property
    def best(self) -> CandidateConcept | None:
        return self.candidates[0] if self.candidates else None


def _as_provider(nlu: NluProvider | IntentModel) -> NluProvider:
    if isinstance(nlu, IntentModel):
        return LocalNluProvider(model=nlu)
    return nlu


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return max(a[0], b[0]) < min(a[1], b[1])


def extract_concepts(
    reply: str, nlu: NluProvider | IntentModel, onto: Ontology
) -> ExtractionResult:
    """Run the full recognition pipeline over one reply.

    Entity recognition runs once on the whole reply; intent matching runs
    per atomic piece. A slot candidate is kept only when its span overlaps
    at least one entity mention, and inherits the highest-priority
    overlapping mention's type. Candidates already present in the knowledge
    base are dropped. An empty result is a valid outcome.
    """
    provider = _as_provider(nlu)
    mentions = provider.recognize_entities(reply)
    candidates = []
    for atom in provider.split_atomic(reply):
        matched = provider.match_intent(atom, intents=EXTRACTION_INTENTS)
        if matched is None:
            continue
        intent, slots = matched
        base = atom.source_span[0]
        for s, e in slots:
            reply_span = (base + s, base + e)
            hits = [m for m in mentions if _overlaps(reply_span, m.span)]
            if not hits:
                continue
            best_mention = min(hits, key=lambda m: ENTITY_PRIORITY[m.entity_type])
            text = atom.text[s:e]
            lemma = lemmatize(text)
            if onto.is_known_concept(lemma):
                continue
            candidates.append(
                CandidateConcept(
                    text=text,
                    atomic_ordinal=atom.ordinal,
                    entity_type=best_mention.entity_type,
                    priority=ENTITY_PRIORITY[best_mention.entity_type],
                    lemma=lemma,
                    span=(s, e),
                    reply_span=reply_span,
                    intent=intent,
                )
            )
    candidates.sort(key=lambda c: (c.priority, c.atomic_ordinal, c.span[0]))
    return ExtractionResult(candidates=tuple(candidates))


def classify_outcome(
    extracted: set[tuple[int, int]], tagged: set[tuple[int, int]]
) -> str:
    """Label one atomic sentence.

    TP: some extracted span overlaps a tagged span. FP: something was
    extracted but none of it overlaps a tagged span (whether or not the
    sentence carries tags). FN: nothing extracted, something tagged.
    TN: both empty.
    """
    overlap = any(_overlaps(e, t) for e in extracted for t in tagged)
    if extracted:
        return "TP" if overlap else "FP"
    return "FN" if tagged else "TN"


@dataclass(frozen=True)
class AtomicLabel:
    reply_id: str
    ordinal: int
    label: str
    intent: str
    extracted: tuple[str, ...]
    tagged: tuple[str, ...]


@dataclass
class RecognitionReport:
    matrix: ConfusionMatrix
    per_intent: dict[str, ConfusionMatrix]
    labels: list[AtomicLabel] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "counts": self.matrix.to_dict(),
            "per_intent": {i: m.to_dict() for i, m in sorted(self.per_intent.items())},
            "labels": [
                {
                    "reply_id": rec.reply_id,
                    "ordinal": rec.ordinal,
                    "label": rec.label,
                    "intent": rec.intent,
                    "extracted": list(rec.extracted),
                    "tagged": list(rec.tagged),
                }
                for rec in self.labels
            ],
        }


def run_recognition_eval(
    corpus: list[TaggedUtterance],
    nlu: NluProvider | IntentModel,
    onto: Ontology,
) -> RecognitionReport:
    """Label every atomic sentence of every reply and aggregate the counts.

    Tag spans live on the whole reply; each span is attributed to the
    atomic piece it overlaps. The per-atomic labels always satisfy
    TP + FP + FN + TN = number of atomic sentences.
    """
    provider = _as_provider(nlu)
    counts = {label: 0 for label in OUTCOME_LABELS}
    per_intent: dict[str, dict[str, int]] = {}
    labels = []
    for idx, reply in enumerate(corpus):
        result = extract_concepts(reply.text, provider, onto)
        by_ordinal: dict[int, list[CandidateConcept]] = {}
        for cand in result.candidates:
            by_ordinal.setdefault(cand.atomic_ordinal, []).append(cand)
        for atom in provider.split_atomic(reply.text):
            extracted = {c.reply_span for c in by_ordinal.get(atom.ordinal, [])}
            tagged = {
                span for span in reply.tags if _overlaps(span, atom.source_span)
            }
            label = classify_outcome(extracted, tagged)
            counts[label] += 1
            bucket = per_intent.setdefault(
                reply.intent, {lab: 0 for lab in OUTCOME_LABELS}
            )
            bucket[label] += 1
            labels.append(
                AtomicLabel(
                    reply_id=reply.question_id or str(idx),
                    ordinal=atom.ordinal,
                    label=label,
                    intent=reply.intent,
                    extracted=tuple(
                        c.text for c in by_ordinal.get(atom.ordinal, [])
                    ),
                    tagged=tuple(
                        reply.text[s:e]
                        for s, e in sorted(tagged)
                    ),
                )
            )
    return RecognitionReport(
        matrix=ConfusionMatrix(
            tp=counts["TP"], fp=counts["FP"], fn=counts["FN"], tn=counts["TN"]
        ),
        per_intent={
            intent: ConfusionMatrix(
                tp=c["TP"], fp=c["FP"], fn=c["FN"], tn=c["TN"]
            )
            for intent, c in per_intent.items()
        },
        labels=labels,
    )
