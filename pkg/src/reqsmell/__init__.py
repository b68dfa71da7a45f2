"""Weak-word requirement smell review: detection, prediction, validation loop.

The pieces, in data-flow order: a catalog-driven detector turns requirement
text into findings; a predictor labels each finding (zero-shot or with
similarity-retrieved validated examples as shots); a review service lets a
human accept or correct each prediction, growing the shot pool; a harness
replays the whole loop against annotated data and scores it.
"""

from .backends import OracleBackend, RemoteChatBackend, ScriptedBackend, backend_from_config
from .detector import WeakWordCatalog, catalog_from_words, detect, extract_findings, load_catalog
from .embeddings import (
    DeterministicLocalProvider,
    EmbeddingVector,
    cosine_similarity,
    deterministic_fallback_embed,
    provider_from_config,
)
from .errors import ReqsmellError
from .model import Finding, Label, Prediction, Requirement, WeakWordOccurrence, normalize_text, parse_label
from .pool import RetrievedShot, ShotPool, ValidatedExample, load_pool
from .predictor import BatchItem, PredictionResult, PredictorConfig, predict, predict_batch
from .prompts import build_prompt, parse_output

__version__ = "0.1.0"

__all__ = [
    "BatchItem",
    "DeterministicLocalProvider",
    "EmbeddingVector",
    "Finding",
    "Label",
    "OracleBackend",
    "Prediction",
    "PredictionResult",
    "PredictorConfig",
    "RemoteChatBackend",
    "ReqsmellError",
    "Requirement",
    "RetrievedShot",
    "ScriptedBackend",
    "ShotPool",
    "ValidatedExample",
    "WeakWordCatalog",
    "WeakWordOccurrence",
    "__version__",
    "backend_from_config",
    "build_prompt",
    "catalog_from_words",
    "cosine_similarity",
    "detect",
    "deterministic_fallback_embed",
    "extract_findings",
    "load_catalog",
    "load_pool",
    "normalize_text",
    "parse_label",
    "parse_output",
    "predict",
    "predict_batch",
    "provider_from_config",
]
