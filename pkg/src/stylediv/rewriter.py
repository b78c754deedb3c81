"""Semantic-preserving rewrites: seeded perturbation rules, a deterministic
offline rewriter built on them, and a chat-completion HTTP client."""

from __future__ import annotations

import hashlib
import logging
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import httpx

from .cache import JsonlCache, cache_key, content_hash
from .errors import PartialRewriteError, ProviderUnavailableError
from .lexicon import SYNONYMS
from .textops import TokenizerConfig, TokenSequence, tokenize

log = logging.getLogger(__name__)

RULES = ("identity", "synonym-swap", "shuffle-window", "drop-rate")
PLACEHOLDER = "{text}"


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def deterministic_rewrite(
    x: TokenSequence | Sequence[str],
    rule: str,
    seed: int = 0,
    rate: float = 0.0,
    window: int = 3,
    lexicon: Mapping[str, Sequence[str]] | None = None,
) -> TokenSequence:
    """Apply one seeded perturbation rule to a token sequence.

    synonym-swap
        replaces exactly ``round(rate * E)`` of the ``E`` swap-eligible
        tokens, each with a different member of its synonym group.
    shuffle-window
        cuts the sequence into consecutive windows of ``window`` tokens and
        shuffles each one with probability ``rate``.
    drop-rate
        deletes ``round(rate * n)`` tokens but always keeps at least one.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rewrite rule {rule!r}; expected one of {RULES}")
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    tokens = list(x.tokens if isinstance(x, TokenSequence) else x)
    rng = random.Random(seed)

    if rule == "synonym-swap":
        lexicon = SYNONYMS if lexicon is None else lexicon
        eligible = [i for i, tok in enumerate(tokens) if len(lexicon.get(tok, ())) > 1]
        k = _round_half_up(rate * len(eligible))
        for i in sorted(rng.sample(eligible, k)):
            tokens[i] = rng.choice([w for w in lexicon[tokens[i]] if w != tokens[i]])
    elif rule == "shuffle-window":
        if window < 1:
            raise ValueError("window must be >= 1")
        for start in range(0, len(tokens), window):
            if rng.random() < rate:
                chunk = tokens[start:start + window]
                rng.shuffle(chunk)
                tokens[start:start + window] = chunk
    elif rule == "drop-rate":
        k = _round_half_up(rate * len(tokens))
        k = min(k, max(len(tokens) - 1, 0))
        dropped = set(rng.sample(range(len(tokens)), k))
        tokens = [t for i, t in enumerate(tokens) if i not in dropped]

    return TokenSequence(tuple(tokens), len(" ".join(tokens)))


@dataclass(frozen=True)
class RewritePrompt:
    id: str
    template: str

    def __post_init__(self):
        if self.template.count(PLACEHOLDER) != 1:
            raise ValueError(f"prompt {self.id!r} must contain exactly one {PLACEHOLDER} placeholder")

    def render(self, text: str) -> str:
        return self.template.replace(PLACEHOLDER, text)


DEFAULT_PROMPTS: tuple[RewritePrompt, ...] = (
    RewritePrompt(
        "fluency",
        "Revise the following text to improve its fluency while keeping its meaning. "
        "Return only the revised text.\n\n{text}",
    ),
    RewritePrompt(
        "concise",
        "Paraphrase the following text concisely without changing its meaning. "
        "Return only the paraphrase.\n\n{text}",
    ),
)


@dataclass(frozen=True)
class RuleSpec:
    rule: str = "synonym-swap"
    rate: float = 0.6
    window: int = 3


@dataclass(frozen=True)
class RewriterConfig:
    kind: str = "deterministic"
    seed: int = 0
    # per-prompt rule for the deterministic kind; prompts not listed use default_rule
    rules: Mapping[str, RuleSpec] = field(default_factory=dict)
    default_rule: RuleSpec = RuleSpec()
    endpoint: str | None = None
    model: str | None = None
    token_env: str = "STYLEDIV_REWRITE_TOKEN"
    temperature: float = 0.0
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 1.0
    max_in_flight: int = 4
    cache_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("deterministic", "remote-http"):
            raise ValueError(f"unknown rewriter kind {self.kind!r}")
        if self.kind == "remote-http" and not self.endpoint:
            raise ValueError("remote-http rewriter needs an endpoint")

    def rule_for(self, prompt_id: str) -> RuleSpec:
        return self.rules.get(prompt_id, self.default_rule)

    @property
    def provider_id(self) -> str:
        if self.kind == "deterministic":
            rules = sorted((k, v.rule, v.rate, v.window) for k, v in self.rules.items())
            d = self.default_rule
            return f"deterministic:seed={self.seed}:default={d.rule}/{d.rate}/{d.window}:rules={rules}"
        return f"remote:{self.endpoint}:{self.model}:t={self.temperature}"


@dataclass(frozen=True)
class RewriteSet:
    document_id: str
    rewrites: tuple[tuple[str, str], ...]
    provider_id: str

    def __post_init__(self):
        if not self.rewrites:
            raise ValueError("a rewrite set needs at least one rewrite")
        ids = [pid for pid, _ in self.rewrites]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate prompt ids in rewrite set: {ids}")

    @property
    def prompt_ids(self) -> list[str]:
        return [pid for pid, _ in self.rewrites]

    @property
    def texts(self) -> list[str]:
        return [t for _, t in self.rewrites]

    def to_json(self) -> dict:
        return {
            "document_id": self.document_id,
            "provider_id": self.provider_id,
            "rewrites": [{"prompt_id": p, "text": t} for p, t in self.rewrites],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RewriteSet":
        return cls(
            obj["document_id"],
            tuple((r["prompt_id"], r["text"]) for r in obj["rewrites"]),
            obj["provider_id"],
        )


class Rewriter:
    """Cache-fronted rewrite provider. ``calls`` counts cache misses."""

    def __init__(self, config: RewriterConfig):
        self.config = config
        self.cache = JsonlCache(config.cache_path) if config.cache_path else None
        self.calls = 0
        self._count_lock = threading.Lock()

    @property
    def provider_id(self) -> str:
        return self.config.provider_id

    def rewrite_text(self, text: str, prompt: RewritePrompt, document_id: str | None = None) -> str:
        key = cache_key(self.provider_id, prompt.id, content_hash(text))
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit["text"]
        with self._count_lock:
            self.calls += 1
        out = self._generate(text, prompt, document_id)
        if not out or not out.strip():
            raise ProviderUnavailableError(f"empty rewrite for prompt {prompt.id!r}", document_id)
        if self.cache is not None:
            self.cache.put({"key": key, "prompt_id": prompt.id, "text": out})
        return out

    def _generate(self, text: str, prompt: RewritePrompt, document_id: str | None) -> str:
        raise NotImplementedError


class DeterministicRewriter(Rewriter):
    """Offline stand-in for a rewriting language model.

    Output depends only on the token sequence of the input, the prompt id
    and the configured seed.
    """

    def __init__(self, config: RewriterConfig, tokenizer: TokenizerConfig | None = None):
        super().__init__(config)
        self.tokenizer = tokenizer or TokenizerConfig()

    def _generate(self, text, prompt, document_id):
        toks = tokenize(text, self.tokenizer)
        spec = self.config.rule_for(prompt.id)
        material = f"{self.config.seed}\x1f{prompt.id}\x1f{toks.text()}".encode("utf-8")
        seed = int.from_bytes(hashlib.sha256(material).digest()[:8], "little")
        out = deterministic_rewrite(toks, spec.rule, seed=seed, rate=spec.rate, window=spec.window)
        if toks.tokens and not out.tokens:
            raise ProviderUnavailableError("deterministic rewrite produced no tokens", document_id)
        return out.text()


class RemoteRewriter(Rewriter):
    """Chat-completion client: ``{model, messages, temperature}`` in,
    ``choices[0].message.content`` out, with bounded retries."""

    def __init__(self, config: RewriterConfig, transport: httpx.BaseTransport | None = None):
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

    def _generate(self, text, prompt, document_id):
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt.render(text)}],
            "temperature": self.config.temperature,
        }
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
                raise ProviderUnavailableError(f"rewrite request rejected: HTTP {resp.status_code}", document_id)
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                last = exc
                continue
            if isinstance(content, str) and content.strip():
                return content.strip()
            last = RuntimeError("empty completion")
        log.warning("rewrite provider gave up after %d attempts: %s", self.config.retries + 1, last)
        raise ProviderUnavailableError(f"rewrite provider unavailable: {last}", document_id)


def make_rewriter(config: RewriterConfig, **kwargs) -> Rewriter:
    if config.kind == "deterministic":
        return DeterministicRewriter(config, **kwargs)
    return RemoteRewriter(config, **kwargs)


def rewrite(x, prompts: Sequence[RewritePrompt], provider: Rewriter | RewriterConfig) -> RewriteSet:
    """Rewrite one document under every prompt, in prompt order.

    ``x`` is a record with ``id`` and ``text`` or a bare string. Any failed
    prompt raises :class:`PartialRewriteError`; the original text is never
    substituted for a missing rewrite.
    """
    if not prompts:
        raise ValueError("at least one rewrite prompt is required")
    if isinstance(provider, RewriterConfig):
        provider = make_rewriter(provider)
    doc_id, text = (None, x) if isinstance(x, str) else (x.id, x.text)
    done: dict[str, str] = {}
    causes: dict[str, str] = {}
    for prompt in prompts:
        try:
            done[prompt.id] = provider.rewrite_text(text, prompt, doc_id)
        except ProviderUnavailableError as exc:
            causes[prompt.id] = str(exc)
    if causes:
        raise PartialRewriteError(doc_id, list(causes), done, causes)
    return RewriteSet(doc_id, tuple((p.id, done[p.id]) for p in prompts), provider.provider_id)


def rewrite_corpus(docs, prompts, provider: Rewriter, workers: int = 1) -> list[RewriteSet]:
    """Rewrite many documents; output order follows ``docs`` regardless of
    completion order."""
    if workers <= 1:
        return [rewrite(d, prompts, provider) for d in docs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda d: rewrite(d, prompts, provider), docs))
