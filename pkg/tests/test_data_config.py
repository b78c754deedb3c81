import json

import pytest

from stylediv.config import PipelineConfig, config_from_dict, load_config
from stylediv.data import DatasetRecord, ingest, write_records
from stylediv.errors import DatasetError


def write_lines(path, *lines):
    path.write_text("".join(line + "\n" for line in lines))
    return path


class TestIngest:
    def test_three_records(self, tmp_path):
        p = write_lines(tmp_path / "d.jsonl",
                        '{"id": "a", "text": "one", "label": 0}',
                        '{"id": "b", "text": "two", "label": 1, "domain": "news"}',
                        '{"id": 3, "text": "three"}')
        recs = ingest(p)
        assert [r.id for r in recs] == ["a", "b", "3"]
        assert recs[1] == DatasetRecord("b", "two", 1, "news")
        assert recs[2].label is None

    @pytest.mark.parametrize("bad,match", [
        ('{"id": "b", "text": ', "malformed"),
        ('{"id": "a", "text": "again"}', "duplicate"),
        ('{"id": "b"}', "missing text"),
        ('{"id": "b", "text": "x", "label": 2}', "label"),
        ('{"id": "b", "text": "x", "label": true}', "label"),
        ('{"id": "b", "text": "  ", "label": 1}', "empty"),
        ('[1, 2]', "object"),
    ])
    def test_line_numbered_errors(self, tmp_path, bad, match):
        p = write_lines(tmp_path / "d.jsonl", '{"id": "a", "text": "ok"}', bad)
        with pytest.raises(DatasetError, match=match) as exc:
            ingest(p)
        assert exc.value.line == 2

    def test_train_mode_requires_labels(self, tmp_path):
        p = write_lines(tmp_path / "d.jsonl", '{"id": "a", "text": "ok"}')
        assert len(ingest(p, mode="detect")) == 1
        with pytest.raises(DatasetError, match="unlabeled"):
            ingest(p, mode="train")

    def test_write_round_trip(self, tmp_path):
        recs = [DatasetRecord("x", "héllo wörld", 1, "d"), DatasetRecord("y", "plain")]
        write_records(tmp_path / "o.jsonl", recs)
        assert ingest(tmp_path / "o.jsonl") == recs

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            ingest(tmp_path / "x.csv", format="csv")


CONFIG = """
tau = 0.6
seed = 3

[features]
n2 = 3
alpha = 2.0

[[prompts]]
id = "plain"
template = "Rewrite plainly: {text}"

[rewriter]
seed = 7
default_rule = { rule = "drop-rate", rate = 0.2 }

[train]
num_rounds = 12
learning_rate = 0.2
"""


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.tau == 0.5 and cfg.train.num_rounds == 100 and cfg.features.n2 == 4
        assert [p.id for p in cfg.prompts] == ["fluency", "concise"]

    def test_toml_file(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text(CONFIG)
        cfg = load_config(p)
        assert cfg.tau == 0.6 and cfg.features.n2 == 3 and cfg.features.alpha == 2.0
        assert cfg.prompts[0].render("x y") == "Rewrite plainly: x y"
        assert cfg.rewriter.default_rule.rule == "drop-rate" and cfg.rewriter.seed == 7
        assert cfg.train.num_rounds == 12

    def test_overrides_win(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text(CONFIG)
        cfg = load_config(p, {"train.num_rounds": 5, "tau": None, "features.n1": 2})
        assert cfg.train.num_rounds == 5 and cfg.tau == 0.6 and cfg.features.n1 == 2

    @pytest.mark.parametrize("raw", [{"bogus": 1}, {"train": {"rounds": 3}}, {"features": {"n3": 1}}])
    def test_unknown_keys(self, raw):
        with pytest.raises(ValueError, match="unknown"):
            config_from_dict(raw)

    def test_hash_tracks_feature_state_only(self):
        base = PipelineConfig().config_hash
        assert load_config().config_hash == base
        assert load_config(overrides={"train.num_rounds": 3, "tau": 0.9}).config_hash == base
        for key, val in [("features.n2", 3), ("rewriter.seed", 1), ("embedding.dim", 128),
                         ("tokenizer.lowercase", False)]:
            assert load_config(overrides={key: val}).config_hash != base

    def test_to_dict_is_json(self):
        json.dumps(load_config().to_dict())
