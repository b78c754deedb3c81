"""stylediv: flag machine-written text by how little it changes when rewritten.

Verbs: rewrite, featurize, train, detect, evaluate, attribute, synth.
Settings come from defaults, then ``--config FILE`` (TOML), then flags.
Failures print one JSON error record on stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import gbdt
from .config import load_config
from .data import ingest, write_records
from .errors import MissingArtifactError, StyleDivError
from .evaluation import divergence_report, evaluate_scores
from .features import FeatureMatrix, load_feature_matrix, save_feature_matrix
from .pipeline import Pipeline, check_hash
from .rewriter import RewriteSet

log = logging.getLogger("stylediv")


def _need(path: str | None, flag: str) -> Path:
    if not path:
        raise StyleDivError(f"{flag} is required")
    p = Path(path)
    if not p.exists():
        raise MissingArtifactError(f"{flag} {p} does not exist")
    return p


def _write_jsonl(path: str | None, rows) -> None:
    lines = [json.dumps(r, sort_keys=True) for r in rows]
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            print(line)


def _pipeline(args, with_model: bool = False) -> Pipeline:
    overrides = {"tau": getattr(args, "tau", None), "workers": getattr(args, "workers", None)}
    if getattr(args, "seed", None) is not None:
        overrides.update({"seed": args.seed, "rewriter.seed": args.seed})
    if getattr(args, "cache_dir", None):
        cache = Path(args.cache_dir)
        overrides.update({"rewriter.cache_path": str(cache / "rewrites.jsonl"),
                          "embedding.cache_path": str(cache / "embeddings.jsonl")})
    cfg = load_config(args.config, overrides)
    pl = Pipeline(cfg)
    if with_model:
        pl.set_model(gbdt.load(_need(args.model, "--model")))
    return pl


def _load_rewrites(path: Path, pl: Pipeline) -> dict[str, RewriteSet]:
    out = {}
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                check_hash(pl.config_hash, obj.get("config_hash"), f"rewrite file {path}")
                rs = RewriteSet.from_json(obj)
                out[rs.document_id] = rs
    return out


def _features_for(args, pl: Pipeline, mode: str = "detect") -> FeatureMatrix:
    if getattr(args, "features", None):
        fm = load_feature_matrix(_need(args.features, "--features"))
        check_hash(pl.config_hash, fm.meta.get("config_hash"), f"feature matrix {args.features}")
        return fm
    docs = ingest(_need(args.input, "--input"), mode=mode)
    rewrites = None
    if getattr(args, "rewrites", None):
        by_id = _load_rewrites(_need(args.rewrites, "--rewrites"), pl)
        missing = [d.id for d in docs if d.id not in by_id]
        if missing:
            raise MissingArtifactError(f"no rewrites for documents {missing[:5]}")
        rewrites = [by_id[d.id] for d in docs]
    return pl.featurize(docs, rewrites)


def cmd_rewrite(args) -> int:
    pl = _pipeline(args)
    docs = ingest(_need(args.input, "--input"))
    sets = pl.rewrite(docs)
    _write_jsonl(args.output, [{**s.to_json(), "config_hash": pl.config_hash} for s in sets])
    log.info("rewrote %d documents, %d provider calls", len(sets), pl.rewriter.calls)
    return 0


def cmd_featurize(args) -> int:
    pl = _pipeline(args)
    fm = _features_for(args, pl)
    save_feature_matrix(_need_out(args), fm)
    log.info("featurized %d documents (%d rewrite calls, %d embedding calls)",
             len(fm.ids), pl.rewriter.calls, pl.embedder.calls)
    return 0


def _need_out(args) -> str:
    if not args.output:
        raise StyleDivError("--output is required")
    return args.output


def cmd_train(args) -> int:
    pl = _pipeline(args)
    src = args.features or args.input
    if src and Path(src).exists() and Path(src + ".meta.json").exists():
        fm = load_feature_matrix(src)
    else:
        args.features = None
        fm = _features_for(args, pl, mode="train")
    ens = pl.fit_features(fm)
    gbdt.save(ens, args.model or _need_out(args))
    return 0


def cmd_detect(args) -> int:
    pl = _pipeline(args, with_model=True)
    fm = _features_for(args, pl)
    probs = pl.predict_features(fm)
    tau = pl.config.tau
    _write_jsonl(args.output, [
        {"id": i, "probability": float(p), "label": int(p > tau)} for i, p in zip(fm.ids, probs)
    ])
    return 0


def cmd_evaluate(args) -> int:
    pl = _pipeline(args, with_model=True)
    fm = _features_for(args, pl, mode="train")
    probs = pl.predict_features(fm)
    report = evaluate_scores(probs, fm.y, args.threshold)
    ec = pl.config.eval
    report.divergences = divergence_report(fm.X, probs, fm.y, ec.bins, ec.epsilon, fm.meta.get("feature_names"))
    report.config_hash = pl.config_hash
    out = report.to_json()
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.csv:
        names = fm.meta.get("feature_names") or [f"f{j}" for j in range(fm.X.shape[1])]
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "label", "probability", *names])
            for i, lab, p, row in zip(fm.ids, fm.labels, probs, fm.X):
                w.writerow([i, lab, repr(float(p)), *[repr(float(v)) for v in row]])
    return 0


def cmd_attribute(args) -> int:
    pl = _pipeline(args, with_model=True)
    docs = ingest(_need(args.input, "--input"))
    rows = []
    for d in docs:
        att = pl.attribute(d, max_tokens=args.max_tokens, aggregate=args.aggregate)
        rows.append({**att.to_json(), "config_hash": pl.config_hash})
    _write_jsonl(args.output, rows)
    return 0


def cmd_synth(args) -> int:
    from .synthetic import make_corpus

    recs = make_corpus(args.n_human, args.n_machine, seed=args.seed or 0)
    write_records(_need_out(args), recs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stylediv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, model=False, inputs=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--output", help="output path (stdout when omitted, where sensible)")
        p.add_argument("--seed", type=int)
        p.add_argument("--tau", type=float, help="decision threshold on the probability")
        p.add_argument("--workers", type=int)
        p.add_argument("--cache-dir", help="directory for the rewrite and embedding caches")
        if inputs:
            p.add_argument("--input", help="dataset (JSON lines)")
        if model:
            p.add_argument("--model", required=name != "train", help="model file (JSON)")
        p.set_defaults(func=func)
        return p

    add("rewrite", cmd_rewrite, "rewrite every document under each configured prompt")
    p = add("featurize", cmd_featurize, "compute the feature matrix")
    p.add_argument("--rewrites", help="precomputed rewrite file from `rewrite`")
    p = add("train", cmd_train, "train the boosted-tree detector", model=True)
    p.add_argument("--features", help="feature matrix from `featurize`")
    p.add_argument("--rewrites")
    p = add("detect", cmd_detect, "print per-document probability and label", model=True)
    p.add_argument("--features")
    p.add_argument("--rewrites")
    p = add("evaluate", cmd_evaluate, "AUROC, F1 sweep and divergences on labeled data", model=True)
    p.add_argument("--features")
    p.add_argument("--rewrites")
    p.add_argument("--threshold", type=float,
                   help="fixed F1 threshold (e.g. chosen on validation); default sweeps the evaluated scores")
    p.add_argument("--csv", help="also write a per-document score/feature table")
    p = add("attribute", cmd_attribute, "per-segment probabilities for each document", model=True)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--aggregate", choices=("mean", "max"))
    p = add("synth", cmd_synth, "write a synthetic labeled corpus", inputs=False)
    p.add_argument("--n-human", type=int, default=500)
    p.add_argument("--n-machine", type=int, default=500)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (StyleDivError, ValueError, OSError) as exc:
        code = exc.code if isinstance(exc, StyleDivError) else type(exc).__name__
        rec = {"error": code, "message": str(exc), "command": args.command}
        if getattr(exc, "line", None) is not None:
            rec["line"] = exc.line
        print(json.dumps(rec, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
