"""Synthetic corpora with a controlled rewrite-stability gap.

"Machine" documents are written almost entirely from words outside the
synonym lexicon, so the synonym-swap rewriter leaves them nearly intact.
"Human" documents draw most words from the lexicon and churn heavily under
the same rewriter. Candidate documents are generated and then kept only if
their measured churn meets the class contract, so the contract holds for
every document, not just on average.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .data import HUMAN, MACHINE, DatasetRecord
from .lexicon import SYNONYM_GROUPS
from .rewriter import DEFAULT_PROMPTS, DeterministicRewriter, RewritePrompt, RewriterConfig
from .textops import edit_distance, tokenize

STABLE_WORDS = tuple("""
the a an of to in on at for with from by as and or but if then so because while
this that these those it its they them their we our you your he she his her
is are was were be been being has have had do does did will would can could
should may might must not no yes all some many most few each every other such
system process result method report value table figure market policy region
season river mountain village city county garden kitchen window door paper
letter number order level model sample record series signal pattern network
energy water light sound color metal stone glass wood cloth field forest
island coast harbor bridge tower station engine motor wheel cable pipe valve
council committee member office agency budget schedule contract account
product service customer supplier factory warehouse shipment delivery
student teacher lesson course exam grade school library museum theater
doctor patient clinic nurse treatment dose symptom therapy vaccine
morning evening night summer winter spring autumn monday friday weekend
first second third last next previous early late upper lower central
north south east west inner outer public private local national
""".split())

LEXICON_WORDS = tuple(w for group in SYNONYM_GROUPS for w in group)
_stable = set(STABLE_WORDS)
assert not _stable & set(LEXICON_WORDS), "stable vocabulary overlaps the synonym lexicon"


@dataclass(frozen=True)
class SyntheticSpec:
    human_lexicon_rate: float = 0.9
    machine_lexicon_rate: float = 0.03
    sentence_len: tuple[int, int] = (6, 14)
    sentences: tuple[int, int] = (3, 10)
    human_min_churn: float = 0.40
    machine_max_churn: float = 0.05


def default_rewriter() -> DeterministicRewriter:
    return DeterministicRewriter(RewriterConfig())


def churn(text: str, rewriter=None, prompt: RewritePrompt = DEFAULT_PROMPTS[0]) -> float:
    """Fraction of tokens changed by one rewrite (token edit distance over
    the longer length)."""
    rewriter = rewriter or default_rewriter()
    a = tokenize(text)
    b = tokenize(rewriter.rewrite_text(text, prompt))
    longest = max(len(a), len(b))
    return edit_distance(a, b) / longest if longest else 0.0


def _sentence(rng: random.Random, lexicon_rate: float, spec: SyntheticSpec) -> str:
    n = rng.randint(*spec.sentence_len)
    words = [
        rng.choice(LEXICON_WORDS) if rng.random() < lexicon_rate else rng.choice(STABLE_WORDS)
        for _ in range(n)
    ]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def make_text(rng: random.Random, label: int, n_sentences: int, spec: SyntheticSpec = SyntheticSpec()) -> str:
    rate = spec.human_lexicon_rate if label == HUMAN else spec.machine_lexicon_rate
    return " ".join(_sentence(rng, rate, spec) for _ in range(n_sentences))


def make_document(rng: random.Random, label: int, spec: SyntheticSpec = SyntheticSpec(),
                  sentences: tuple[int, int] | None = None, rewriter=None, max_tries: int = 1000) -> str:
    """Draw one document of the given class that satisfies its churn contract."""
    lo, hi = sentences or spec.sentences
    for _ in range(max_tries):
        text = make_text(rng, label, rng.randint(lo, hi), spec)
        c = churn(text, rewriter)
        if label == HUMAN and c >= spec.human_min_churn:
            return text
        if label == MACHINE and c <= spec.machine_max_churn:
            return text
    raise RuntimeError("could not satisfy the churn contract; check the synthetic spec")


def make_corpus(n_human: int = 500, n_machine: int = 500, seed: int = 0,
                spec: SyntheticSpec = SyntheticSpec(), sentences: tuple[int, int] | None = None,
                prefix: str = "doc", rewriter=None) -> list[DatasetRecord]:
    rng = random.Random(seed)
    labels = [HUMAN] * n_human + [MACHINE] * n_machine
    rng.shuffle(labels)
    width = len(str(len(labels)))
    return [
        DatasetRecord(f"{prefix}-{i:0{width}d}", make_document(rng, y, spec, sentences, rewriter), y, "synthetic")
        for i, y in enumerate(labels)
    ]


def split_corpus(records, test_fraction: float = 0.3, seed: int = 0):
    """Stratified train/test split with a seeded shuffle per class."""
    rng = random.Random(seed)
    train, test = [], []
    for label in (HUMAN, MACHINE):
        group = [r for r in records if r.label == label]
        rng.shuffle(group)
        k = int(round(len(group) * test_fraction))
        test.extend(group[:k])
        train.extend(group[k:])
    key = {r.id: i for i, r in enumerate(records)}
    return sorted(train, key=lambda r: key[r.id]), sorted(test, key=lambda r: key[r.id])


def make_hybrid_document(rng: random.Random, pattern=(MACHINE, MACHINE, HUMAN, HUMAN),
                         segment_tokens: int = 64, spec: SyntheticSpec = SyntheticSpec(),
                         doc_id: str = "hybrid") -> tuple[DatasetRecord, list[int]]:
    """Concatenate class-pure blocks of whole sentences, each block at most
    ``segment_tokens`` long, and return the per-token origin labels."""
    pieces, origin = [], []
    for label in pattern:
        block: list[str] = []
        while True:
            sent = tokenize(make_text(rng, label, 1, spec)).tokens
            if len(block) + len(sent) > segment_tokens:
                break
            block.extend(sent)
        pieces.extend(block)
        origin.extend([label] * len(block))
    return DatasetRecord(doc_id, " ".join(pieces), MACHINE), origin
