"""Second-order gradient-boosted regression trees for binary log-loss.

Each round fits one tree to the per-sample gradients ``g = p - y`` and
hessians ``h = p (1 - p)`` of the log-loss at the current logits. Tree
structure is chosen greedily to maximize

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - (G_L+G_R)^2/(H_L+H_R+lam)] - gamma

and each leaf takes the minimizer of ``G w + 1/2 (H + lam) w^2``, i.e.
``w = -G / (H + lam)``. Logits are updated as ``logit += eta * tree(x)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import expit

from ._accel import kernels
from .errors import DimensionMismatchError, ModelFormatError

MODEL_FORMAT = "stylediv-gbdt"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    num_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 4
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_samples_leaf: int = 2
    seed: int = 0
    base_logit: float = 0.0

    def __post_init__(self):
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.reg_lambda < 0 or self.gamma < 0:
            raise ValueError("reg_lambda and gamma must be >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class Leaf:
    weight: float


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


def grad_hess(y: float, logit: float) -> tuple[float, float]:
    p = float(expit(logit))
    return p - y, p * (1.0 - p)


def log_loss(y, logit):
    """Per-sample negative log-likelihood written in logit space."""
    logit = np.asarray(logit, dtype=np.float64)
    # -[y log p + (1-y) log(1-p)] == log(1 + e^z) - y z
    return np.logaddexp(0.0, logit) - np.asarray(y, dtype=np.float64) * logit


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    if H < 0 or reg_lambda < 0:
        raise ValueError("hessian sum and lambda must be non-negative")
    if H + reg_lambda <= 0:
        raise ValueError("H + lambda must be positive")
    return -G / (H + reg_lambda)


def split_gain(G_L, H_L, G_R, H_R, reg_lambda, gamma) -> float:
    return 0.5 * (
        G_L * G_L / (H_L + reg_lambda)
        + G_R * G_R / (H_R + reg_lambda)
        - (G_L + G_R) ** 2 / (H_L + H_R + reg_lambda)
    ) - gamma


def tree_value(node: Node, x) -> float:
    while isinstance(node, Split):
        node = node.left if x[node.feature] < node.threshold else node.right
    return node.weight


def tree_values(node: Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if isinstance(nd, Leaf):
            out[idx] = nd.weight
            continue
        go_left = X[idx, nd.feature] < nd.threshold
        stack.append((nd.left, idx[go_left]))
        stack.append((nd.right, idx[~go_left]))
    return out


def tree_depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_leaves(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return tree_leaves(node.left) + tree_leaves(node.right)


@dataclass
class TreeEnsemble:
    base_logit: float
    learning_rate: float
    trees: list[Node]
    feature_dim: int
    meta: dict = field(default_factory=dict)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_dim:
            raise DimensionMismatchError(f"expected (n, {self.feature_dim}) features, got {X.shape}")
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total = total + tree_values(tree, X)
        return self.base_logit + self.learning_rate * total

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


def predict_logit(ensemble: TreeEnsemble, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (ensemble.feature_dim,):
        raise DimensionMismatchError(f"expected {ensemble.feature_dim} features, got shape {x.shape}")
    total = 0.0
    for tree in ensemble.trees:
        total = total + tree_value(tree, x)
    return ensemble.base_logit + ensemble.learning_rate * total


def predict_label(ensemble: TreeEnsemble, x, tau: float = 0.5) -> tuple[int, float]:
    """Return ``(label, probability)``; positive only when p is strictly above tau."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    p = float(expit(predict_logit(ensemble, x)))
    return int(p > tau), p


def _check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"feature matrix must be non-empty 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"{X.shape[0]} rows but {y.shape} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if X.shape[0] < 2 or np.unique(y).size < 2:
        raise ValueError("training needs at least two examples covering both classes")
    return np.ascontiguousarray(X), y.astype(np.float64)


class _Grower:
    def __init__(self, X, g, h, cfg: TrainConfig):
        self.X, self.g, self.h, self.cfg = X, g, h, cfg

    def grow(self, idx: np.ndarray, depth: int) -> Node:
        cfg = self.cfg
        G = float(np.sum(self.g[idx]))
        H = float(np.sum(self.h[idx]))
        if depth < cfg.max_depth and idx.size >= 2 * cfg.min_samples_leaf:
            best_gain, best_f, best_thr = 0.0, -1, 0.0
            for f in range(self.X.shape[1]):
                col = self.X[idx, f]
                order = np.argsort(col, kind="stable")
                gain, thr, _ = kernels.best_split_sorted(
                    np.ascontiguousarray(col[order]),
                    np.ascontiguousarray(self.g[idx][order]),
                    np.ascontiguousarray(self.h[idx][order]),
                    G, H, cfg.reg_lambda, cfg.gamma, cfg.min_samples_leaf,
                )
                # strict improvement keeps the lowest feature index on ties
                if gain > best_gain:
                    best_gain, best_f, best_thr = gain, f, thr
            if best_f >= 0:
                go_left = self.X[idx, best_f] < best_thr
                return Split(
                    best_f,
                    float(best_thr),
                    self.grow(idx[go_left], depth + 1),
                    self.grow(idx[~go_left], depth + 1),
                )
        if H + cfg.reg_lambda <= 0.0:
            # fully saturated node with lambda = 0: no curvature to step on
            return Leaf(0.0)
        return Leaf(leaf_weight(G, H, cfg.reg_lambda))


def train(X, y, config: TrainConfig | None = None, history: list | None = None) -> TreeEnsemble:
    """Fit ``config.num_rounds`` trees by Newton boosting on log-loss.

    Training is fully deterministic (no subsampling); ``config.seed`` is
    recorded but not consumed. If ``history`` is a list, the mean training
    log-loss before the first round and after every round is appended.
    """
    cfg = config or TrainConfig()
    X, yf = _check_training_data(X, y)
    logits = np.full(X.shape[0], cfg.base_logit)
    if history is not None:
        history.append(float(np.mean(log_loss(yf, logits))))
    trees: list[Node] = []
    all_idx = np.arange(X.shape[0])
    for _ in range(cfg.num_rounds):
        p = expit(logits)
        g = p - yf
        h = p * (1.0 - p)
        tree = _Grower(X, g, h, cfg).grow(all_idx, 0)
        trees.append(tree)
        logits = logits + cfg.learning_rate * tree_values(tree, X)
        if history is not None:
            history.append(float(np.mean(log_loss(yf, logits))))
    return TreeEnsemble(
        base_logit=cfg.base_logit,
        learning_rate=cfg.learning_rate,
        trees=trees,
        feature_dim=X.shape[1],
        meta={"train_config": asdict(cfg)},
    )


# -- serialization -----------------------------------------------------------

def _flatten(node: Node) -> list[dict]:
    nodes: list[dict] = []

    def visit(nd: Node) -> int:
        nid = len(nodes)
        if isinstance(nd, Leaf):
            nodes.append({"id": nid, "leaf": float(nd.weight)})
            return nid
        rec = {"id": nid, "feature": int(nd.feature), "threshold": float(nd.threshold)}
        nodes.append(rec)
        rec["left"] = visit(nd.left)
        rec["right"] = visit(nd.right)
        return nid

    visit(node)
    return nodes


def _rebuild(nodes: list[dict], feature_dim: int) -> Node:
    by_id = {}
    for rec in nodes:
        if not isinstance(rec, dict) or "id" not in rec:
            raise ModelFormatError(f"bad node record {rec!r}")
        by_id[rec["id"]] = rec

    def build(nid, depth) -> Node:
        if nid not in by_id or depth > len(nodes):
            raise ModelFormatError(f"dangling or cyclic node reference {nid!r}")
        rec = by_id[nid]
        if "leaf" in rec:
            return Leaf(float(rec["leaf"]))
        try:
            f, thr = int(rec["feature"]), float(rec["threshold"])
            left, right = rec["left"], rec["right"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"bad split node {rec!r}") from exc
        if not 0 <= f < feature_dim:
            raise ModelFormatError(f"feature index {f} outside [0, {feature_dim})")
        return Split(f, thr, build(left, depth + 1), build(right, depth + 1))

    if not nodes:
        raise ModelFormatError("tree with no nodes")
    return build(nodes[0]["id"], 0)


def to_dict(ensemble: TreeEnsemble) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "base_logit": float(ensemble.base_logit),
        "learning_rate": float(ensemble.learning_rate),
        "feature_dim": int(ensemble.feature_dim),
        "meta": ensemble.meta,
        "trees": [{"nodes": _flatten(t)} for t in ensemble.trees],
    }


def from_dict(obj: dict) -> TreeEnsemble:
    if not isinstance(obj, dict):
        raise ModelFormatError("model file must hold a JSON object")
    if obj.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {obj.get('version')!r} (expected {MODEL_VERSION})")
    try:
        dim = int(obj["feature_dim"])
        ens = TreeEnsemble(
            base_logit=float(obj["base_logit"]),
            learning_rate=float(obj["learning_rate"]),
            trees=[_rebuild(t["nodes"], dim) for t in obj["trees"]],
            feature_dim=dim,
            meta=dict(obj.get("meta", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    if not all(math.isfinite(v) for v in (ens.base_logit, ens.learning_rate)):
        raise ModelFormatError("non-finite base_logit or learning_rate")
    return ens


def save(ensemble: TreeEnsemble, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_dict(ensemble), indent=1) + "\n", encoding="utf-8")


def load(path: str | Path) -> TreeEnsemble:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return from_dict(obj)
