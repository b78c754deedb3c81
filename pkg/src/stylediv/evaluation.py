"""Detection metrics, class-distribution divergences, segment attribution
and the corpus-level robustness harnesses (mixing and perturbation)."""

from __future__ import annotations

import hashlib
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import rel_entr
from scipy.stats import rankdata

from .data import DatasetRecord
from .errors import StyleDivError
from .rewriter import RULES, deterministic_rewrite
from .textops import SENTENCE_END, TokenizerConfig, tokenize


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError(f"scores {s.shape} and labels {y.shape} must be equal-length vectors")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if not (np.any(y == 1) and np.any(y == 0)):
        raise ValueError("both classes must be present")
    return s, y.astype(np.int64)


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC: P(score_pos > score_neg) + 0.5 P(tie)."""
    s, y = _check_binary(scores, labels)
    ranks = rankdata(s)  # average ranks, so ties contribute one half
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    return 0.0 if tp == 0 else 2.0 * tp / (2.0 * tp + fp + fn)


def confusion_at(scores, labels, threshold: float) -> Confusion:
    s, y = _check_binary(scores, labels)
    pred = s > threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    return Confusion(tp, fp, int(np.sum(y == 0)) - fp, int(np.sum(y == 1)) - tp)


def f1_at(scores, labels, threshold: float) -> float:
    c = confusion_at(scores, labels, threshold)
    return f1_from_counts(c.tp, c.fp, c.fn)


def candidate_thresholds(scores) -> np.ndarray:
    """-inf, the midpoints between consecutive distinct scores, +inf."""
    u = np.unique(np.asarray(scores, dtype=np.float64))
    mid = 0.5 * (u[:-1] + u[1:])
    mid = np.where(mid >= u[1:], u[:-1], mid)  # keep u[k] <= t < u[k+1]
    return np.concatenate(([-np.inf], mid, [np.inf]))


def best_f1_sweep(scores, labels) -> tuple[float, float, Confusion]:
    """Best F1 (label 1 positive) over all distinct decision thresholds.

    A score counts as positive when it is strictly above the threshold.
    Ties between thresholds go to the larger one.
    """
    s, y = _check_binary(scores, labels)
    thr = candidate_thresholds(s)
    pos = np.sort(s[y == 1])
    neg = np.sort(s[y == 0])
    tp = pos.size - np.searchsorted(pos, thr, side="right")
    fp = neg.size - np.searchsorted(neg, thr, side="right")
    fn = pos.size - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(tp > 0, 2.0 * tp / np.maximum(denom, 1), 0.0)
    k = f1.size - 1 - int(np.argmax(f1[::-1]))
    conf = Confusion(int(tp[k]), int(fp[k]), int(neg.size - fp[k]), int(fn[k]))
    return float(f1[k]), float(thr[k]), conf


# -- divergences --------------------------------------------------------------

def smoothed_histograms(p_samples, q_samples, bins: int = 20, epsilon: float = 1e-6):
    """Equal-width histograms of both samples over their common range,
    with ``epsilon`` added to every bin before renormalizing.

    Returns ``None`` when all values coincide (no usable range).
    """
    a = np.asarray(p_samples, dtype=np.float64)
    b = np.asarray(q_samples, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if bins < 2:
        raise ValueError("need at least 2 bins")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if not hi > lo:
        return None
    p = np.histogram(a, bins=bins, range=(lo, hi))[0] / a.size + epsilon
    q = np.histogram(b, bins=bins, range=(lo, hi))[0] / b.size + epsilon
    return p / p.sum(), q / q.sum()


def kl_divergence(p, q) -> float:
    return float(np.sum(rel_entr(np.asarray(p, float), np.asarray(q, float))))


def hellinger(p, q) -> float:
    d = np.sqrt(np.asarray(p, float)) - np.sqrt(np.asarray(q, float))
    return float(min(1.0, np.sqrt(np.sum(d * d)) / np.sqrt(2.0)))


def divergences(p_samples, q_samples, bins: int = 20, epsilon: float = 1e-6) -> tuple[float, float]:
    """``(KL(P||Q), Hellinger(P, Q))`` between two empirical samples."""
    hist = smoothed_histograms(p_samples, q_samples, bins, epsilon)
    if hist is None:
        return 0.0, 0.0
    return kl_divergence(*hist), hellinger(*hist)


@dataclass
class DivergenceReport:
    kl_feature: float
    kl_score: float
    hellinger_feature: float
    hellinger_score: float
    bin_count: int
    epsilon: float
    per_dimension: list[dict] = field(default_factory=list)


def divergence_report(features, scores, labels, bins: int = 20, epsilon: float = 1e-6,
                      feature_names: Sequence[str] | None = None) -> DivergenceReport:
    """Machine-vs-human divergences of each feature column and of the scores.

    P is the machine (label 1) sample, Q the human one. The feature-level
    figures are means over columns; each column is also listed.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim == 1:
        X = X[:, None]
    per_dim = []
    for j in range(X.shape[1]):
        kl, hel = divergences(X[y == 1, j], X[y == 0, j], bins, epsilon)
        name = feature_names[j] if feature_names else f"f{j}"
        per_dim.append({"feature": name, "kl": kl, "hellinger": hel})
    s = np.asarray(scores, dtype=np.float64)
    kl_s, hel_s = divergences(s[y == 1], s[y == 0], bins, epsilon)
    return DivergenceReport(
        kl_feature=float(np.mean([d["kl"] for d in per_dim])),
        kl_score=kl_s,
        hellinger_feature=float(np.mean([d["hellinger"] for d in per_dim])),
        hellinger_score=hel_s,
        bin_count=bins,
        epsilon=epsilon,
        per_dimension=per_dim,
    )


# -- reports ------------------------------------------------------------------

@dataclass
class EvalReport:
    auroc: float
    best_f1: float
    best_threshold: float
    confusion: Confusion
    n_pos: int
    n_neg: int
    f1_mode: str = "oracle"
    divergences: DivergenceReport | None = None
    config_hash: str | None = None
    segments: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        thr = out["best_threshold"]
        if not np.isfinite(thr):
            out["best_threshold"] = "inf" if thr > 0 else "-inf"
        return out


def evaluate_scores(scores, labels, threshold: float | None = None) -> EvalReport:
    """AUROC plus F1. Without ``threshold`` the F1 is the oracle sweep over
    the evaluated scores themselves; with one, F1 is taken at that fixed
    (e.g. validation-chosen) threshold."""
    s, y = _check_binary(scores, labels)
    if threshold is None:
        f1, thr, conf = best_f1_sweep(s, y)
        mode = "oracle"
    else:
        conf = confusion_at(s, y, threshold)
        f1, thr, mode = f1_from_counts(conf.tp, conf.fp, conf.fn), float(threshold), "validation"
    return EvalReport(auroc(s, y), f1, thr, conf, int(y.sum()), int((y == 0).sum()), mode)


def relative_drop(clean: float, perturbed: float) -> float:
    return (clean - perturbed) / clean if clean else 0.0


# -- segment attribution --------------------------------------------------------

def segment_spans(tokens: Sequence[str], max_tokens: int = 64) -> list[tuple[int, int]]:
    """Greedy partition into consecutive spans of at most ``max_tokens``.

    When the rest does not fit in one window, the span ends after the last
    sentence-final token inside the window, if there is one.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    spans = []
    start, n = 0, len(tokens)
    while start < n:
        limit = start + max_tokens
        if n <= limit:
            end = n
        else:
            end = limit
            for i in range(limit - 1, start, -1):
                if tokens[i] in SENTENCE_END:
                    end = i + 1
                    break
        spans.append((start, end))
        start = end
    return spans


@dataclass
class SegmentScore:
    start: int
    end: int
    probability: float | None
    error: str | None = None


@dataclass
class SegmentAttribution:
    document_id: str | None
    segments: list[SegmentScore]
    aggregate: float | None
    aggregate_mode: str = "mean"

    def to_json(self) -> dict:
        return asdict(self)


def attribute_segments(
    x,
    score_text: Callable[[str, str | None], float],
    max_tokens: int = 64,
    aggregate: str = "mean",
    tokenizer: TokenizerConfig | None = None,
    workers: int = 1,
) -> SegmentAttribution:
    """Score consecutive token spans of a document independently.

    ``score_text(text, segment_id)`` runs the whole rewrite, featurize and
    predict chain and returns a probability. A document that fits in one
    window is scored on its original text, so the result equals the
    whole-document probability. Failed spans keep ``probability=None`` and
    carry the error message.
    """
    if aggregate not in ("mean", "max"):
        raise ValueError("aggregate must be 'mean' or 'max'")
    doc_id, text = (None, x) if isinstance(x, str) else (x.id, x.text)
    toks = tokenize(text, tokenizer)
    if not toks.tokens:
        raise ValueError("cannot attribute an empty document")
    spans = segment_spans(toks.tokens, max_tokens)

    def run(span):
        s, e = span
        seg_text = text if len(spans) == 1 else " ".join(toks.tokens[s:e])
        seg_id = f"{doc_id}[{s}:{e}]" if doc_id is not None else f"[{s}:{e}]"
        try:
            return SegmentScore(s, e, float(score_text(seg_text, seg_id)))
        except StyleDivError as exc:
            return SegmentScore(s, e, None, str(exc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            segs = list(pool.map(run, spans))
    else:
        segs = [run(sp) for sp in spans]
    probs = [sg.probability for sg in segs if sg.probability is not None]
    agg = None
    if probs:
        agg = float(np.mean(probs)) if aggregate == "mean" else float(np.max(probs))
    return SegmentAttribution(doc_id, segs, agg, aggregate)


# -- robustness harnesses -------------------------------------------------------

@dataclass(frozen=True)
class MixedDocument:
    id: str
    text: str
    label: int
    origin: tuple[int, ...]  # per token: 1 = machine-written, 0 = human

    def to_record(self) -> DatasetRecord:
        return DatasetRecord(self.id, self.text, self.label)


def _derived_seed(seed: int, *parts: str) -> int:
    material = "\x1f".join([str(seed), *parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "little")


def _sentence_starts(tokens: Sequence[str]) -> list[int]:
    return [0] + [i + 1 for i, t in enumerate(tokens[:-1]) if t in SENTENCE_END]


def mix_corpus(human_docs, machine_docs, ratio: float = 4.0, seed: int = 0,
               tokenizer: TokenizerConfig | None = None) -> list[MixedDocument]:
    """Insert machine-written material into human documents.

    Each human document of ``n`` tokens receives one contiguous block of
    ``round(n / ratio)`` machine tokens at a sentence boundary, so the
    human:machine token ratio is ``ratio``:1. Composites are labeled 1.
    ``ratio=0`` disables mixing and returns the human documents with label 0.
    Machine material is consumed without reuse, starting each block at a
    sentence start.
    """
    if ratio < 0:
        raise ValueError("ratio must be non-negative")
    out: list[MixedDocument] = []
    if ratio == 0:
        for d in human_docs:
            n = len(tokenize(d.text, tokenizer))
            out.append(MixedDocument(d.id, d.text, 0, (0,) * n))
        return out
    rng = random.Random(seed)
    pool_docs = list(machine_docs)
    rng.shuffle(pool_docs)
    pool = [tokenize(d.text, tokenizer).tokens for d in pool_docs]
    doc_i, pos = 0, 0
    for d in human_docs:
        htoks = list(tokenize(d.text, tokenizer).tokens)
        need = int(len(htoks) / ratio + 0.5)
        block: list[str] = []
        while len(block) < need:
            if doc_i >= len(pool):
                raise StyleDivError(
                    f"insufficient machine material: needed {need} tokens for document {d.id}"
                )
            src = pool[doc_i]
            take = src[pos:pos + need - len(block)]
            block.extend(take)
            pos += len(take)
            # next block starts at a sentence start
            nxt = [s for s in _sentence_starts(src) if s >= pos]
            if nxt:
                pos = nxt[0]
            else:
                doc_i, pos = doc_i + 1, 0
        at = rng.choice(_sentence_starts(htoks) + [len(htoks)])
        toks = htoks[:at] + block + htoks[at:]
        origin = (0,) * at + (1,) * len(block) + (0,) * (len(htoks) - at)
        out.append(MixedDocument(f"{d.id}+mix", " ".join(toks), 1, origin))
    return out


def perturb_corpus(docs, rule: str, rate: float, seed: int = 0,
                   tokenizer: TokenizerConfig | None = None, window: int = 3) -> list[DatasetRecord]:
    """Apply a seeded perturbation rule to every document; labels are kept.

    ``rate == 0`` and the identity rule return the records untouched.
    """
    if rule not in RULES:
        raise ValueError(f"unknown perturbation rule {rule!r}")
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    out = []
    for d in docs:
        if rate == 0 or rule == "identity":
            out.append(d)
            continue
        toks = tokenize(d.text, tokenizer)
        pert = deterministic_rewrite(toks, rule, seed=_derived_seed(seed, rule, str(d.id)),
                                     rate=rate, window=window)
        out.append(DatasetRecord(d.id, pert.text(), d.label, getattr(d, "domain", None)))
    return out
