import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import auroc_pairwise, f1_brute
from stylediv.data import DatasetRecord
from stylediv.errors import StyleDivError
from stylediv.evaluation import (
    attribute_segments,
    auroc,
    best_f1_sweep,
    divergence_report,
    divergences,
    evaluate_scores,
    f1_at,
    hellinger,
    kl_divergence,
    mix_corpus,
    perturb_corpus,
    relative_drop,
    segment_spans,
)
from stylediv.textops import tokenize

scored = st.lists(st.tuples(st.integers(0, 6).map(float), st.integers(0, 1)), min_size=2, max_size=40).filter(
    lambda rows: {y for _, y in rows} == {0, 1})


class TestAuroc:
    def test_examples(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
        assert auroc([0.5] * 4, [0, 1, 0, 1]) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            auroc([0.1, 0.2], [1, 1])

    @given(scored)
    def test_matches_pairwise_count(self, rows):
        s, y = zip(*rows)
        assert auroc(s, y) == pytest.approx(auroc_pairwise(s, y), abs=1e-12)

    @given(scored, st.sampled_from([np.exp, lambda v: 3 * v + 1, np.arctan]))
    def test_monotone_transform_invariance(self, rows, f):
        s, y = zip(*rows)
        assert auroc(f(np.array(s)), y) == pytest.approx(auroc(s, y), abs=1e-12)


class TestF1:
    def test_separable(self):
        f1, thr, _ = best_f1_sweep([0.9, 0.8, 0.2], [1, 1, 0])
        assert f1 == 1.0 and 0.2 <= thr < 0.8

    def test_inverted_labels(self):
        s, y = [0.9, 0.8, 0.2], [0, 0, 1]
        assert best_f1_sweep(s, y)[0] == pytest.approx(f1_brute(s, y)) == pytest.approx(0.5)

    def test_all_equal_scores(self):
        f1, thr, conf = best_f1_sweep([0.3] * 5, [1, 1, 0, 0, 0])
        assert f1 == pytest.approx(2 * 2 / (5 + 2))
        assert thr == -math.inf and conf.fp == 3

    @given(scored)
    def test_sweep_matches_brute_force(self, rows):
        s, y = zip(*rows)
        assert best_f1_sweep(s, y)[0] == pytest.approx(f1_brute(s, y), abs=1e-12)

    def test_sweep_beats_random_thresholds(self):
        rng = np.random.default_rng(3)
        s = rng.normal(size=120)
        y = (s + rng.normal(size=120) > 0).astype(int)
        best = best_f1_sweep(s, y)[0]
        for t in rng.uniform(s.min() - 1, s.max() + 1, size=100):
            assert f1_at(s, y, t) <= best + 1e-12

    def test_report_modes(self):
        rep = evaluate_scores([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
        assert rep.f1_mode == "oracle" and rep.auroc == 1.0
        rep = evaluate_scores([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1], threshold=0.85)
        assert rep.f1_mode == "validation" and rep.best_f1 == pytest.approx(2 / 3)
        assert rep.to_json()["confusion"]["tp"] == 1


class TestDivergences:
    def test_closed_form(self):
        p, q = np.array([0.75, 0.25]), np.array([0.25, 0.75])
        assert kl_divergence(p, q) == pytest.approx(0.5 * math.log(3), abs=1e-12)
        assert hellinger(p, q) == pytest.approx(math.sqrt(1 - math.sqrt(3) / 2), abs=1e-12)

    def test_identical_samples(self):
        a = [0.1, 0.5, 0.5, 0.9]
        assert divergences(a, a) == (0.0, 0.0)

    def test_constant_samples(self):
        assert divergences([1.0] * 4, [1.0] * 3) == (0.0, 0.0)

    def test_disjoint_point_masses(self):
        kl, h = divergences([0.0] * 10, [1.0] * 10, bins=2, epsilon=1e-12)
        assert h == pytest.approx(1.0, abs=1e-5) and kl > 20

    @settings(max_examples=50)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=30), st.lists(st.floats(-5, 5), min_size=1, max_size=30))
    def test_bounds(self, a, b):
        kl, h = divergences(a, b)
        assert kl >= 0 and 0 <= h <= 1

    def test_report_direction(self):
        rng = np.random.default_rng(0)
        labels = np.repeat([0, 1], 200)
        scores = np.where(labels == 1, rng.uniform(0.7, 1.0, 400), rng.uniform(0.0, 0.3, 400))
        feats = np.column_stack([rng.normal(size=400), labels + rng.normal(scale=2.0, size=400)])
        rep = divergence_report(feats, scores, labels, feature_names=["noise", "weak"])
        assert rep.kl_score > rep.kl_feature and rep.hellinger_score > rep.hellinger_feature
        assert {d["feature"] for d in rep.per_dimension} == {"noise", "weak"}


class TestSegments:
    def test_span_lengths(self):
        spans = segment_spans(["w"] * 130, 64)
        assert [e - s for s, e in spans] == [64, 64, 2]

    def test_spans_prefer_sentence_ends(self):
        toks = (["w"] * 9 + ["."]) * 10
        spans = segment_spans(toks, 64)
        assert spans[0] == (0, 60) and spans[-1][1] == 100

    @given(st.lists(st.sampled_from(["a", "b", "."]), min_size=1, max_size=200), st.integers(1, 70))
    def test_spans_partition(self, toks, m):
        spans = segment_spans(toks, m)
        assert spans[0][0] == 0 and spans[-1][1] == len(toks)
        assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
        assert all(0 < e - s <= m for s, e in spans)

    def test_single_segment_uses_original_text(self):
        seen = []
        res = attribute_segments("Short text here.", lambda t, i: seen.append(t) or 0.25)
        assert seen == ["Short text here."] and res.aggregate == 0.25

    def test_aggregates(self):
        text = " ".join(["w"] * 130)
        probs = iter([0.2, 0.4, 0.9])
        res = attribute_segments(text, lambda t, i: next(probs))
        assert res.aggregate == pytest.approx(0.5)
        res = attribute_segments(text, lambda t, i: 0.1 * len(t.split()), aggregate="max")
        assert res.aggregate == pytest.approx(6.4)

    def test_failed_segment_is_reported(self):
        def score(text, seg_id):
            if seg_id.startswith("d[64"):
                raise StyleDivError("provider down")
            return 0.3

        res = attribute_segments(DatasetRecord("d", " ".join(["w"] * 130)), score)
        assert res.segments[1].probability is None and "provider down" in res.segments[1].error
        assert res.aggregate == pytest.approx(0.3)


def _doc(i, n, sentence=10):
    words = []
    for k in range(n):
        words.append("." if (k + 1) % sentence == 0 else f"h{i}")
    return DatasetRecord(f"h{i}", " ".join(words), 0)


class TestMixing:
    machine = [DatasetRecord(f"m{i}", " ".join(["m"] * 9 + ["."]) * 1 + " " + " ".join(["m"] * 9 + ["."]), 1)
               for i in range(20)]

    def test_ratio(self):
        (mixed,) = mix_corpus([_doc(0, 100)], self.machine, ratio=4.0)
        toks = tokenize(mixed.text).tokens
        assert len(toks) == 125 and sum(mixed.origin) == 25 and mixed.label == 1
        assert [t == "m" or (t == "." and o) for t, o in zip(toks, mixed.origin)].count(True) == 25

    def test_block_is_contiguous_at_sentence_boundary(self):
        (mixed,) = mix_corpus([_doc(0, 100)], self.machine, ratio=4.0, seed=5)
        o = mixed.origin
        start = o.index(1)
        assert all(o[start:start + 25]) and sum(o) == 25
        assert start % 10 == 0

    def test_ratio_zero(self):
        docs = [_doc(0, 30)]
        (same,) = mix_corpus(docs, self.machine, ratio=0)
        assert same.text == docs[0].text and same.label == 0 and sum(same.origin) == 0

    def test_deterministic(self):
        docs = [_doc(i, 40 + i) for i in range(5)]
        assert mix_corpus(docs, self.machine, seed=3) == mix_corpus(docs, self.machine, seed=3)

    def test_insufficient_material(self):
        with pytest.raises(StyleDivError, match="insufficient"):
            mix_corpus([_doc(0, 400)], self.machine[:1], ratio=1.0)


class TestPerturb:
    docs = [DatasetRecord(f"d{i}", "the big house was quick , and the small car went often .", i % 2)
            for i in range(6)]

    def test_rate_zero_is_identity(self):
        assert perturb_corpus(self.docs, "synonym-swap", 0.0) == self.docs

    def test_reproducible(self):
        a = perturb_corpus(self.docs, "synonym-swap", 0.5, seed=2)
        assert a == perturb_corpus(self.docs, "synonym-swap", 0.5, seed=2)
        assert [d.label for d in a] == [d.label for d in self.docs]
        assert any(x.text != y.text for x, y in zip(a, self.docs))

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            perturb_corpus(self.docs, "nope", 0.1)
        with pytest.raises(ValueError):
            perturb_corpus(self.docs, "drop-rate", 1.5)

    def test_relative_drop(self):
        assert relative_drop(0.9, 0.81) == pytest.approx(0.1)
        assert relative_drop(0.0, 0.5) == 0.0
