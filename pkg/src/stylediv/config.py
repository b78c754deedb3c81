"""Pipeline configuration: TOML file -> nested dataclasses, with a
canonical hash over everything that influences feature values."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .embedding import EmbeddingProviderConfig
from .features import FeatureConfig
from .gbdt import TrainConfig
from .rewriter import DEFAULT_PROMPTS, RewritePrompt, RewriterConfig, RuleSpec
from .textops import TokenizerConfig


@dataclass(frozen=True)
class SegmentConfig:
    max_tokens: int = 64
    aggregate: str = "mean"


@dataclass(frozen=True)
class EvalConfig:
    bins: int = 20
    epsilon: float = 1e-6


@dataclass(frozen=True)
class PipelineConfig:
    tokenizer: TokenizerConfig = TokenizerConfig()
    features: FeatureConfig = FeatureConfig()
    prompts: tuple[RewritePrompt, ...] = DEFAULT_PROMPTS
    rewriter: RewriterConfig = RewriterConfig()
    embedding: EmbeddingProviderConfig = EmbeddingProviderConfig()
    train: TrainConfig = TrainConfig()
    segments: SegmentConfig = SegmentConfig()
    eval: EvalConfig = EvalConfig()
    tau: float = 0.5
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if not self.prompts:
            raise ValueError("at least one rewrite prompt is required")
        if self.features.tokenizer != self.tokenizer:
            object.__setattr__(self, "features", dataclasses.replace(self.features, tokenizer=self.tokenizer))

    def feature_state(self) -> dict:
        """Everything that changes feature values, in canonical form."""
        f = dataclasses.asdict(self.features)
        f.pop("tokenizer")
        return {
            "tokenizer": dataclasses.asdict(self.tokenizer),
            "features": f,
            "prompts": [[p.id, p.template] for p in self.prompts],
            "rewriter": self.rewriter.provider_id,
            "embedding": self.embedding.provider_id,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.feature_state(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["features"] = {k: v for k, v in dataclasses.asdict(self.features).items() if k != "tokenizer"}
        d["prompts"] = [{"id": p.id, "template": p.template} for p in self.prompts]
        return d


def _build(cls, raw: dict | None, section: str):
    raw = dict(raw or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ValueError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    return cls(**raw)


def _rule(raw) -> RuleSpec:
    return _build(RuleSpec, raw, "rewriter rule")


def config_from_dict(raw: dict[str, Any]) -> PipelineConfig:
    raw = dict(raw)
    kwargs: dict[str, Any] = {}
    tok = _build(TokenizerConfig, raw.pop("tokenizer", None), "tokenizer")
    kwargs["tokenizer"] = tok
    feats = dict(raw.pop("features", {}) or {})
    kwargs["features"] = _build(FeatureConfig, {**feats, "tokenizer": tok}, "features")
    if "prompts" in raw:
        kwargs["prompts"] = tuple(_build(RewritePrompt, p, "prompts") for p in raw.pop("prompts"))
    rw = dict(raw.pop("rewriter", {}) or {})
    if "default_rule" in rw:
        rw["default_rule"] = _rule(rw["default_rule"])
    if "rules" in rw:
        rw["rules"] = {k: _rule(v) for k, v in rw["rules"].items()}
    kwargs["rewriter"] = _build(RewriterConfig, rw, "rewriter")
    kwargs["embedding"] = _build(EmbeddingProviderConfig, raw.pop("embedding", None), "embedding")
    kwargs["train"] = _build(TrainConfig, raw.pop("train", None), "train")
    kwargs["segments"] = _build(SegmentConfig, raw.pop("segments", None), "segments")
    kwargs["eval"] = _build(EvalConfig, raw.pop("eval", None), "eval")
    top = {f.name for f in dataclasses.fields(PipelineConfig)} - set(kwargs)
    unknown = set(raw) - top
    if unknown:
        raise ValueError(f"unknown top-level config key(s): {sorted(unknown)}")
    kwargs.update(raw)
    return PipelineConfig(**kwargs)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> PipelineConfig:
    """Defaults, then the TOML file, then ``overrides`` (dotted keys allowed,
    e.g. ``{"train.num_rounds": 50}``)."""
    raw: dict[str, Any] = {}
    if path is not None:
        with Path(path).open("rb") as fh:
            raw = tomllib.load(fh)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = raw
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return config_from_dict(raw)
