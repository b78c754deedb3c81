"""Embedding providers and the cosine style-stability feature.

Two providers are available:

* ``deterministic-local``: a hashed bag-of-tokens vector (each token is
  sent to a seeded sha256 bucket, counts are L2-normalized). It is an
  offline stand-in for testing and reproducible runs, not a substitute for
  a contextual sentence encoder.
* ``remote-http``: POSTs ``{"model", "input"}`` to an endpoint and expects
  ``{"embedding": [...]}`` back. The service is assumed to pool per-token
  vectors itself (mean pooling is the expected convention).
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Sequence

import httpx
import numpy as np

from .cache import JsonlCache, cache_key, content_hash
from .errors import DimensionMismatchError, ProviderUnavailableError
from .textops import TokenizerConfig, tokenize

log = logging.getLogger(__name__)

KINDS = ("deterministic-local", "remote-http")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    dim: int
    degenerate: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != self.dim:
            raise DimensionMismatchError(f"expected {self.dim} components, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite components")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "deterministic-local"
    dim: int = 256
    seed: int = 0
    endpoint: str | None = None
    model: str | None = None
    token_env: str = "STYLEDIV_EMBED_TOKEN"
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.5
    max_in_flight: int = 4
    cache_path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown embedding provider kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError("embedding dim must be >= 2")
        if self.kind == "remote-http" and not self.endpoint:
            raise ValueError("remote-http embedding provider needs an endpoint")

    @property
    def provider_id(self) -> str:
        if self.kind == "deterministic-local":
            return f"hash-bow:dim={self.dim}:seed={self.seed}"
        return f"remote:{self.endpoint}:{self.model}:dim={self.dim}"


class Embedder:
    """Cache-fronted provider base. ``calls`` counts cache misses."""

    def __init__(self, config: EmbeddingProviderConfig):
        self.config = config
        self.cache = JsonlCache(config.cache_path) if config.cache_path else None
        self.calls = 0
        self._count_lock = threading.Lock()

    @property
    def provider_id(self) -> str:
        return self.config.provider_id

    def embed(self, text: str, document_id: str | None = None) -> EmbeddingVector:
        key = cache_key(self.provider_id, content_hash(text))
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return self._check(np.asarray(hit["values"], dtype=np.float64))
        with self._count_lock:
            self.calls += 1
        vec = self._check(self._compute(text, document_id))
        if self.cache is not None:
            self.cache.put({"key": key, "dim": vec.dim, "values": vec.values.tolist()})
        return vec

    def _check(self, values: np.ndarray) -> EmbeddingVector:
        if values.shape != (self.config.dim,):
            raise DimensionMismatchError(
                f"provider {self.provider_id} returned {values.shape[0] if values.ndim else 0} "
                f"components, config says {self.config.dim}"
            )
        return EmbeddingVector(values, self.config.dim, degenerate=not np.any(values))

    def _compute(self, text: str, document_id: str | None) -> np.ndarray:
        raise NotImplementedError


def hash_bucket(token: str, dim: int, seed: int) -> int:
    digest = hashlib.sha256(f"{seed}\x1f{token}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") % dim


class HashingEmbedder(Embedder):
    def __init__(self, config: EmbeddingProviderConfig, tokenizer: TokenizerConfig | None = None):
        super().__init__(config)
        self.tokenizer = tokenizer or TokenizerConfig()

    def _compute(self, text, document_id):
        vec = np.zeros(self.config.dim)
        for tok in tokenize(text, self.tokenizer):
            vec[hash_bucket(tok, self.config.dim, self.config.seed)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec


class RemoteEmbedder(Embedder):
    def __init__(self, config: EmbeddingProviderConfig, transport: httpx.BaseTransport | None = None):
        super().__init__(config)
        headers = {}
        token = os.environ.get(config.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=config.timeout, headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(max(1, config.max_in_flight))
        self.requests = 0

    def close(self):
        self._client.close()

    def _compute(self, text, document_id):
        payload = {"model": self.config.model, "input": text}
        last: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if attempt:
                time.sleep(self.config.backoff * 2 ** (attempt - 1))
            with self._slots:
                with self._count_lock:
                    self.requests += 1
                try:
                    resp = self._client.post(self.config.endpoint, json=payload)
                except httpx.TransportError as exc:
                    last = exc
                    continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = RuntimeError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise ProviderUnavailableError(f"embedding request rejected: HTTP {resp.status_code}", document_id)
            try:
                values = resp.json()["embedding"]
            except (ValueError, KeyError, TypeError) as exc:
                last = exc
                continue
            return np.asarray(values, dtype=np.float64)
        log.warning("embedding provider gave up after %d attempts: %s", self.config.retries + 1, last)
        raise ProviderUnavailableError(f"embedding provider unavailable: {last}", document_id)


def make_embedder(config: EmbeddingProviderConfig, **kwargs) -> Embedder:
    if config.kind == "deterministic-local":
        return HashingEmbedder(config, **kwargs)
    return RemoteEmbedder(config, **kwargs)


def embed(text: str, provider: Embedder | EmbeddingProviderConfig, document_id: str | None = None) -> EmbeddingVector:
    if isinstance(provider, EmbeddingProviderConfig):
        provider = make_embedder(provider)
    return provider.embed(text, document_id)


def _as_array(v) -> np.ndarray:
    if isinstance(v, EmbeddingVector):
        return v.values
    return np.asarray(v, dtype=np.float64)


def cosine_flagged(x: EmbeddingVector | Sequence[float], y: EmbeddingVector | Sequence[float]) -> tuple[float, bool]:
    """Cosine similarity plus a flag set when either vector has zero norm."""
    a, b = _as_array(x), _as_array(y)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cosine of vectors with shapes {a.shape} and {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0, True
    c = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, c)), False


def cosine_stability(x, y) -> float:
    return cosine_flagged(x, y)[0]
