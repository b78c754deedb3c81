"""Detect machine-generated text from how much its style moves under
semantic-preserving rewrites."""

from ._accel import BACKEND
from .config import PipelineConfig, load_config
from .data import DatasetRecord, ingest
from .embedding import EmbeddingProviderConfig, cosine_stability, embed
from .evaluation import attribute_segments, auroc, best_f1_sweep, divergences, mix_corpus, perturb_corpus
from .features import FeatureConfig, featurize, fuse
from .gbdt import TrainConfig, TreeEnsemble, predict_label, predict_logit, train
from .pipeline import Pipeline
from .rewriter import RewritePrompt, RewriterConfig, deterministic_rewrite, rewrite
from .textops import discrete_block, edit_distance, edit_similarity_feature, ngram_overlap_feature, tokenize

__version__ = "0.1.0"
