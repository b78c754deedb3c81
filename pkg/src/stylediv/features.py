"""Fusion of discrete and continuous blocks into the per-document feature
vector, plus feature-matrix persistence."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .embedding import Embedder, EmbeddingProviderConfig, HashingEmbedder, cosine_flagged
from .errors import StyleDivError
from .rewriter import RewriteSet
from .textops import DiscreteStyleBlock, TokenizerConfig, discrete_block, tokenize

AGGREGATES = ("concat", "mean")


@dataclass(frozen=True)
class FeatureConfig:
    tokenizer: TokenizerConfig = TokenizerConfig()
    n1: int = 1
    n2: int = 4
    alpha: float = 1.0
    beta: float = 1.0
    normalize_overlap: bool = False
    edit_level: str = "word"
    aggregate: str = "concat"

    def __post_init__(self):
        if not 1 <= self.n1 < self.n2:
            raise ValueError(f"need 1 <= n1 < n2, got {self.n1}, {self.n2}")
        if self.aggregate not in AGGREGATES:
            raise ValueError(f"aggregate must be one of {AGGREGATES}")
        if self.edit_level not in ("word", "char"):
            raise ValueError("edit_level must be 'word' or 'char'")


@dataclass(frozen=True)
class StyleFeatureVector:
    document_id: str | None
    blocks: tuple[tuple[float, float, float], ...]
    alpha: float
    beta: float
    flattened: tuple[float, ...]
    degenerate: tuple[bool, ...] = ()
    combine: str = "concat"

    def as_array(self) -> np.ndarray:
        return np.asarray(self.flattened, dtype=np.float64)


def fuse(
    discrete: Sequence[DiscreteStyleBlock],
    continuous: Sequence[float],
    alpha: float = 1.0,
    beta: float = 1.0,
    aggregate: str = "concat",
    document_id: str | None = None,
    degenerate: Sequence[bool] = (),
) -> StyleFeatureVector:
    """Scale each rewrite's (v_n, v_edit, v_c) triple by (alpha, alpha, beta)
    and concatenate the triples in rewrite order (or average them)."""
    if len(discrete) != len(continuous):
        raise ValueError(f"{len(discrete)} discrete blocks but {len(continuous)} continuous values")
    if not discrete:
        raise ValueError("need at least one rewrite block")
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")
    blocks = tuple((float(d.v_n), float(d.v_edit), float(c)) for d, c in zip(discrete, continuous))
    if not all(math.isfinite(v) for b in blocks for v in b):
        raise ValueError("non-finite feature value")
    scaled = [(alpha * vn, alpha * ve, beta * vc) for vn, ve, vc in blocks]
    if aggregate == "concat":
        flat = tuple(v for triple in scaled for v in triple)
    elif aggregate == "mean":
        flat = tuple(float(v) for v in np.mean(np.asarray(scaled), axis=0))
    else:
        raise ValueError(f"aggregate must be one of {AGGREGATES}")
    return StyleFeatureVector(document_id, blocks, alpha, beta, flat, tuple(degenerate), aggregate)


def featurize(x, rewrites: RewriteSet, config: FeatureConfig | None = None,
              embedder: Embedder | None = None) -> StyleFeatureVector:
    """Feature vector of one document against each of its rewrites.

    ``x`` is a record with ``id`` and ``text`` or a bare string.
    """
    config = config or FeatureConfig()
    embedder = embedder or HashingEmbedder(EmbeddingProviderConfig(), config.tokenizer)
    doc_id, text = (None, x) if isinstance(x, str) else (x.id, x.text)
    if not rewrites.rewrites:
        raise ValueError("empty rewrite set")
    try:
        toks = tokenize(text, config.tokenizer)
        x_vec = embedder.embed(text, doc_id)
        discrete, continuous, flags = [], [], []
        for _, rewritten in rewrites.rewrites:
            rtoks = tokenize(rewritten, config.tokenizer)
            discrete.append(discrete_block(toks, rtoks, config.n1, config.n2,
                                           config.normalize_overlap, config.edit_level))
            c, flag = cosine_flagged(x_vec, embedder.embed(rewritten, doc_id))
            continuous.append(c)
            flags.append(flag)
    except StyleDivError:
        raise
    except Exception as exc:
        raise StyleDivError(f"featurization failed for document {doc_id}: {exc}") from exc
    return fuse(discrete, continuous, config.alpha, config.beta, config.aggregate, doc_id, flags)


def featurize_corpus(docs, rewrite_sets, config, embedder, workers: int = 1) -> list[StyleFeatureVector]:
    pairs = list(zip(docs, rewrite_sets))
    if workers <= 1:
        return [featurize(d, r, config, embedder) for d, r in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: featurize(p[0], p[1], config, embedder), pairs))


def feature_names(prompt_ids: Sequence[str], aggregate: str = "concat") -> list[str]:
    if aggregate == "mean":
        return ["mean.v_n", "mean.v_edit", "mean.v_c"]
    return [f"{pid}.{name}" for pid in prompt_ids for name in ("v_n", "v_edit", "v_c")]


@dataclass
class FeatureMatrix:
    ids: list[str]
    X: np.ndarray
    labels: list[int | None]
    meta: dict = field(default_factory=dict)

    @property
    def y(self) -> np.ndarray:
        if any(l is None for l in self.labels):
            raise StyleDivError("feature matrix has unlabeled rows")
        return np.asarray(self.labels, dtype=np.int64)

    @classmethod
    def from_vectors(cls, vectors: Sequence[StyleFeatureVector], labels, meta=None) -> "FeatureMatrix":
        X = np.asarray([v.flattened for v in vectors], dtype=np.float64)
        return cls([v.document_id for v in vectors], X, list(labels), dict(meta or {}))


def meta_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def save_feature_matrix(path: str | Path, fm: FeatureMatrix) -> None:
    """Rows go to ``path`` as JSON lines; metadata goes to ``<path>.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for doc_id, row, label in zip(fm.ids, fm.X, fm.labels):
            rec = {"document_id": doc_id, "flattened": [float(v) for v in row]}
            if label is not None:
                rec["label"] = int(label)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    meta_path(path).write_text(json.dumps(fm.meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_feature_matrix(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    ids, rows, labels = [], [], []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            ids.append(rec["document_id"])
            rows.append(rec["flattened"])
            labels.append(rec.get("label"))
    mp = meta_path(path)
    meta = json.loads(mp.read_text(encoding="utf-8")) if mp.exists() else {}
    X = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, 0))
    return FeatureMatrix(ids, X, labels, meta)
