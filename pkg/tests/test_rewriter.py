import json
from collections import Counter

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stylediv.errors import PartialRewriteError
from stylediv.lexicon import SYNONYMS
from stylediv.rewriter import (
    DEFAULT_PROMPTS,
    DeterministicRewriter,
    RemoteRewriter,
    RewritePrompt,
    RewriterConfig,
    RewriteSet,
    RuleSpec,
    deterministic_rewrite,
    rewrite,
    rewrite_corpus,
)
from stylediv.data import DatasetRecord
from stylediv.textops import edit_similarity_feature, tokenize

words = st.lists(st.sampled_from(["big", "fast", "the", "house", "of", "river", "say", "a"]), max_size=30)
IDENTITY = RewriterConfig(default_rule=RuleSpec("identity", 0.0))


class TestDeterministicRules:
    def test_identity(self):
        assert deterministic_rewrite(["a", "b"], "identity", seed=1).tokens == ("a", "b")

    def test_synonym_swap_exact_count(self):
        toks = ["big", "small", "fast", "slow", "happy", "sad", "start", "end", "buy", "show"]
        assert all(t in SYNONYMS for t in toks)
        out = deterministic_rewrite(toks, "synonym-swap", seed=7, rate=0.2).tokens
        changed = [i for i, (a, b) in enumerate(zip(toks, out)) if a != b]
        assert len(changed) == 2
        for i in changed:
            assert out[i] in SYNONYMS[toks[i]]

    def test_drop_all_keeps_one(self):
        assert len(deterministic_rewrite(list("abcdef"), "drop-rate", seed=0, rate=1.0)) == 1
        assert deterministic_rewrite([], "drop-rate", seed=0, rate=1.0).tokens == ()

    def test_shuffle_window_is_permutation(self):
        src = list("abcdef")
        out = deterministic_rewrite(src, "shuffle-window", seed=1, rate=1.0, window=3).tokens
        assert Counter(out) == Counter(src)
        assert sorted(out[:3]) == list("abc") and sorted(out[3:]) == list("def")

    def test_rejects_unknown_rule_and_rate(self):
        with pytest.raises(ValueError):
            deterministic_rewrite(["a"], "paraphrase")
        with pytest.raises(ValueError):
            deterministic_rewrite(["a"], "drop-rate", rate=1.5)

    @given(words, st.integers(0, 10**6), st.floats(0, 1))
    def test_length_and_multiset_contracts(self, toks, seed, rate):
        for rule in ("identity", "synonym-swap", "shuffle-window"):
            out = deterministic_rewrite(toks, rule, seed=seed, rate=rate).tokens
            assert len(out) == len(toks)
            if toks:
                assert out
        assert Counter(deterministic_rewrite(toks, "shuffle-window", seed=seed, rate=rate).tokens) == Counter(toks)
        dropped = deterministic_rewrite(toks, "drop-rate", seed=seed, rate=rate).tokens
        assert not Counter(dropped) - Counter(toks)
        assert bool(dropped) == bool(toks)

    @given(words, st.integers(0, 10**6))
    def test_seed_determinism(self, toks, seed):
        a = deterministic_rewrite(toks, "synonym-swap", seed=seed, rate=0.5)
        assert a == deterministic_rewrite(toks, "synonym-swap", seed=seed, rate=0.5)


class TestPrompts:
    def test_placeholder_contract(self):
        with pytest.raises(ValueError):
            RewritePrompt("p", "no placeholder")
        with pytest.raises(ValueError):
            RewritePrompt("p", "{text} and {text}")
        assert RewritePrompt("p", "Fix: {text}").render("x {y}") == "Fix: x {y}"

    def test_rewrite_set_invariants(self):
        with pytest.raises(ValueError):
            RewriteSet("d", (), "p")
        with pytest.raises(ValueError):
            RewriteSet("d", (("a", "x"), ("a", "y")), "p")


class TestDeterministicProvider:
    doc = DatasetRecord("d1", "The big house was quick to start. A tiny car.")

    def test_same_inputs_same_rewrites(self):
        a = rewrite(self.doc, DEFAULT_PROMPTS, RewriterConfig(seed=3))
        b = rewrite(self.doc, DEFAULT_PROMPTS, RewriterConfig(seed=3))
        assert a == b
        assert a.prompt_ids == ["fluency", "concise"]

    def test_prompts_differ(self):
        rs = rewrite(self.doc, DEFAULT_PROMPTS, RewriterConfig(seed=3))
        assert rs.texts[0] != rs.texts[1]

    def test_identity_prompt(self):
        rs = rewrite(self.doc, DEFAULT_PROMPTS[:1], IDENTITY)
        assert tokenize(rs.texts[0]).tokens == tokenize(self.doc.text).tokens
        assert edit_similarity_feature(tokenize(self.doc.text), tokenize(rs.texts[0])) == 1.0

    def test_whitespace_does_not_change_output(self):
        p = DeterministicRewriter(RewriterConfig())
        assert p.rewrite_text("big  house", DEFAULT_PROMPTS[0]) == p.rewrite_text("big house", DEFAULT_PROMPTS[0])

    def test_needs_prompts(self):
        with pytest.raises(ValueError):
            rewrite(self.doc, [], RewriterConfig())

    def test_empty_document_is_failure_not_passthrough(self):
        with pytest.raises(PartialRewriteError) as info:
            rewrite(DatasetRecord("e", ""), DEFAULT_PROMPTS, RewriterConfig())
        assert info.value.failed == ["fluency", "concise"]

    def test_cache_second_pass_has_no_calls(self, tmp_path):
        cfg = RewriterConfig(cache_path=str(tmp_path / "rw.jsonl"))
        docs = [DatasetRecord(f"d{i}", f"the big house number {i}") for i in range(5)]
        first = DeterministicRewriter(cfg)
        a = rewrite_corpus(docs, DEFAULT_PROMPTS, first)
        assert first.calls == 10
        second = DeterministicRewriter(cfg)
        b = rewrite_corpus(docs, DEFAULT_PROMPTS, second, workers=3)
        assert second.calls == 0 and [x.texts for x in a] == [x.texts for x in b]
        rec = json.loads((tmp_path / "rw.jsonl").read_text().splitlines()[0])
        assert set(rec) == {"key", "prompt_id", "text"}

    def test_parallel_order_is_deterministic(self):
        docs = [DatasetRecord(f"d{i}", f"quick car {i} big") for i in range(20)]
        p = DeterministicRewriter(RewriterConfig())
        seq = rewrite_corpus(docs, DEFAULT_PROMPTS, p)
        par = rewrite_corpus(docs, DEFAULT_PROMPTS, p, workers=4)
        assert seq == par


class FakeChat:
    def __init__(self, reply=lambda prompt: prompt.upper(), fail_for=()):
        self.reply, self.fail_for = reply, fail_for
        self.bodies = []

    def __call__(self, request):
        body = json.loads(request.content)
        self.bodies.append(body)
        content = body["messages"][0]["content"]
        if any(tag in content for tag in self.fail_for):
            return httpx.Response(500)
        return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": self.reply(content)}}]})


def remote(chat, tmp_path=None):
    cfg = RewriterConfig(kind="remote-http", endpoint="http://llm.test/v1/chat/completions", model="m",
                         retries=1, backoff=0.0, cache_path=str(tmp_path / "rw.jsonl") if tmp_path else None)
    return RemoteRewriter(cfg, transport=httpx.MockTransport(chat))


class TestRemoteProvider:
    prompts = (RewritePrompt("a", "A: {text}"), RewritePrompt("b", "B: {text}"))

    def test_wire_format(self):
        chat = FakeChat()
        rs = rewrite(DatasetRecord("d", "hello"), self.prompts, remote(chat))
        assert rs.texts == ["A: HELLO", "B: HELLO"]
        assert chat.bodies[0] == {"model": "m", "messages": [{"role": "user", "content": "A: hello"}], "temperature": 0.0}

    def test_partial_failure_lists_prompts(self):
        chat = FakeChat(fail_for=("B:",))
        with pytest.raises(PartialRewriteError) as info:
            rewrite(DatasetRecord("d", "hello"), self.prompts, remote(chat))
        assert info.value.failed == ["b"] and info.value.completed == {"a": "A: HELLO"}

    def test_empty_completion_is_failure(self):
        chat = FakeChat(reply=lambda c: "  ")
        with pytest.raises(PartialRewriteError):
            rewrite(DatasetRecord("d", "hello"), self.prompts, remote(chat))

    def test_cache_hit_rate(self, tmp_path):
        chat = FakeChat()
        docs = [DatasetRecord(f"d{i}", f"text {i}") for i in range(3)]
        p1 = remote(chat, tmp_path)
        rewrite_corpus(docs, self.prompts, p1)
        assert p1.requests == 6
        p2 = remote(chat, tmp_path)
        rewrite_corpus(docs, self.prompts, p2)
        assert p2.requests == 0
