"""End-to-end detector: rewrite -> discrete + continuous features ->
boosted trees -> probability and thresholded label."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from . import gbdt
from .config import PipelineConfig
from .data import DatasetRecord
from .embedding import Embedder, make_embedder
from .errors import ConfigMismatchError, StyleDivError
from .evaluation import SegmentAttribution, attribute_segments
from .features import FeatureMatrix, feature_names, featurize_corpus
from .rewriter import Rewriter, RewriteSet, make_rewriter, rewrite_corpus

log = logging.getLogger(__name__)


def check_hash(expected: str | None, found: str | None, what: str) -> None:
    if expected != found:
        raise ConfigMismatchError(f"{what} was produced under config {found}, current config is {expected}")


class Pipeline:
    def __init__(
        self,
        config: PipelineConfig | None = None,
        rewriter: Rewriter | None = None,
        embedder: Embedder | None = None,
        ensemble: gbdt.TreeEnsemble | None = None,
    ):
        self.config = config or PipelineConfig()
        self.rewriter = rewriter or make_rewriter(self.config.rewriter)
        self.embedder = embedder or make_embedder(self.config.embedding)
        self.ensemble = None
        if ensemble is not None:
            self.set_model(ensemble)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash

    @property
    def feature_names(self) -> list[str]:
        return feature_names([p.id for p in self.config.prompts], self.config.features.aggregate)

    def metadata(self) -> dict:
        f = self.config.features
        return {
            "config_hash": self.config_hash,
            "prompt_ids": [p.id for p in self.config.prompts],
            "n1": f.n1,
            "n2": f.n2,
            "alpha": f.alpha,
            "beta": f.beta,
            "aggregate": f.aggregate,
            "combine": "concatenation",
            "feature_names": self.feature_names,
        }

    def set_model(self, ensemble: gbdt.TreeEnsemble) -> None:
        check_hash(self.config_hash, ensemble.meta.get("config_hash"), "model")
        self.ensemble = ensemble

    # -- stages ---------------------------------------------------------------

    def rewrite(self, docs) -> list[RewriteSet]:
        return rewrite_corpus(docs, self.config.prompts, self.rewriter, self.config.workers)

    def featurize(self, docs, rewrite_sets: Sequence[RewriteSet] | None = None) -> FeatureMatrix:
        docs = list(docs)
        if rewrite_sets is None:
            rewrite_sets = self.rewrite(docs)
        for d, r in zip(docs, rewrite_sets):
            if r.document_id != d.id:
                raise StyleDivError(f"rewrite set for {r.document_id} paired with document {d.id}")
            if r.prompt_ids != [p.id for p in self.config.prompts]:
                raise ConfigMismatchError(f"rewrite set for {d.id} has prompts {r.prompt_ids}")
        vectors = featurize_corpus(docs, rewrite_sets, self.config.features, self.embedder, self.config.workers)
        return FeatureMatrix.from_vectors(vectors, [getattr(d, "label", None) for d in docs], self.metadata())

    def fit_features(self, fm: FeatureMatrix) -> gbdt.TreeEnsemble:
        check_hash(self.config_hash, fm.meta.get("config_hash"), "feature matrix")
        ens = gbdt.train(fm.X, fm.y, self.config.train)
        ens.meta.update(config_hash=self.config_hash, feature_names=fm.meta.get("feature_names"))
        self.ensemble = ens
        return ens

    def fit(self, docs) -> gbdt.TreeEnsemble:
        return self.fit_features(self.featurize(docs))

    def _require_model(self) -> gbdt.TreeEnsemble:
        if self.ensemble is None:
            raise StyleDivError("no trained model loaded")
        return self.ensemble

    def predict_features(self, fm: FeatureMatrix) -> np.ndarray:
        check_hash(self.config_hash, fm.meta.get("config_hash"), "feature matrix")
        return self._require_model().predict_proba(fm.X)

    def predict_proba(self, docs) -> np.ndarray:
        return self.predict_features(self.featurize(docs))

    def probability(self, text: str, doc_id: str | None = None) -> float:
        fm = self.featurize([DatasetRecord(doc_id or "", text)])
        return float(self.predict_features(fm)[0])

    def detect(self, docs) -> list[dict]:
        docs = list(docs)
        probs = self.predict_proba(docs)
        tau = self.config.tau
        return [
            {"id": d.id, "probability": float(p), "label": int(p > tau)}
            for d, p in zip(docs, probs)
        ]

    def attribute(self, doc, max_tokens: int | None = None, aggregate: str | None = None) -> SegmentAttribution:
        self._require_model()
        seg = self.config.segments
        return attribute_segments(
            doc,
            self.probability,
            max_tokens=max_tokens or seg.max_tokens,
            aggregate=aggregate or seg.aggregate,
            tokenizer=self.config.tokenizer,
        )
