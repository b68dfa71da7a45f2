"""Embedding providers and cosine similarity for shot retrieval.

Two providers: a remote HTTP one for live use and a deterministic local
fallback (hashed character trigrams) so every test and simulation runs
offline. Vectors are embedded once per pool record and persisted.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConfigError, DimensionMismatch, ProviderError, ZeroVector
from .model import normalize_text

FALLBACK_DIM = 256


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector; values are finite and len(values) == dim."""

    values: tuple[float, ...]
    dim: int

    def __post_init__(self) -> None:
        if len(self.values) != self.dim:
            raise DimensionMismatch(
                f"vector has {len(self.values)} values, declared dim {self.dim}"
            )
        if not np.isfinite(self.array).all():
            raise ValueError("vector contains non-finite values")

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a,b) / (|a| * |b|); symmetric because every term is commutative."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cosine over dims {a.dim} and {b.dim}")
    na = np.linalg.norm(a.array)
    nb = np.linalg.norm(b.array)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.dot(a.array, b.array) / (na * nb))


@lru_cache(maxsize=65536)
def _fallback_cached(text: str, dim: int) -> EmbeddingVector:
    s = normalize_text(text)
    terms = [s[i : i + 3] for i in range(len(s) - 2)] if len(s) >= 3 else [s]
    vec = np.zeros(dim, dtype=np.float64)
    for term in terms:
        digest = hashlib.blake2b(term.encode("utf-8"), digest_size=8).digest()
        vec[int.from_bytes(digest, "big") % dim] += 1.0
    vec /= np.linalg.norm(vec)
    return EmbeddingVector(tuple(vec.tolist()), dim)


def deterministic_fallback_embed(text: str, dim: int = FALLBACK_DIM) -> EmbeddingVector:
    """Hashed character-trigram term frequencies folded into dim buckets, L2-normalized.

    Pure and stable across processes (keyed hash, not Python's salted hash).
    """
    if dim < 8:
        raise ValueError(f"fallback embedding dim must be >= 8, got {dim}")
    return _fallback_cached(text, dim)


class DeterministicLocalProvider:
    """Offline provider backed by the trigram fallback embedding."""

    kind = "deterministic_local"

    def __init__(self, dim: int = FALLBACK_DIM):
        if dim < 8:
            raise ConfigError(f"local provider dim must be >= 8, got {dim}")
        self.dim = dim

    def embed(self, text: str) -> EmbeddingVector:
        if not text:
            raise ValueError("cannot embed empty text")
        return deterministic_fallback_embed(text, self.dim)


class RemoteEmbeddingProvider:
    """HTTP provider: POST {"input": text, "model": name} -> JSON float array.

    Also accepts the nested response shape used by common hosted endpoints
    ({"data": [{"embedding": [...]}]}). The API key is read from the
    environment variable named by ``api_key_env``.
    """

    kind = "remote"

    def __init__(
        self,
        endpoint_url: str,
        model_name: str,
        dim: int,
        api_key_env: str = "EMBEDDING_API_KEY",
        timeout: float = 30.0,
        max_retries: int = 3,
        max_concurrency: int = 4,
    ):
        if not endpoint_url or not model_name:
            raise ConfigError("remote provider requires endpoint_url and model_name")
        self.endpoint_url = endpoint_url
        self.model_name = model_name
        self.dim = dim
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self._gate = threading.Semaphore(max_concurrency)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def embed(self, text: str) -> EmbeddingVector:
        import requests

        if not text:
            raise ValueError("cannot embed empty text")
        payload = {"input": text, "model": self.model_name}
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(0.5 * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = requests.post(
                        self.endpoint_url,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.timeout,
                    )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in (429, 500, 502, 503, 504):
                last_error = ProviderError(f"HTTP {resp.status_code} from embedding endpoint")
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"embedding endpoint returned HTTP {resp.status_code}: {resp.text[:200]}"
                )
            return self._parse(resp.json())
        raise ProviderError(f"embedding request failed after {self.max_retries} attempts: {last_error}")

    def _parse(self, body) -> EmbeddingVector:
        if isinstance(body, dict):
            if "data" in body:
                body = body["data"][0]["embedding"]
            elif "embedding" in body:
                body = body["embedding"]
        if not isinstance(body, list):
            raise ProviderError(f"unexpected embedding response shape: {type(body).__name__}")
        values = tuple(float(v) for v in body)
        if len(values) != self.dim:
            raise DimensionMismatch(
                f"provider returned {len(values)} values, expected dim {self.dim}"
            )
        return EmbeddingVector(values, self.dim)


def embed_text(text: str, provider) -> EmbeddingVector:
    """Embed text with the given provider; local providers are pure."""
    return provider.embed(text)


def provider_from_config(config: dict):
    """Build a provider from a plain config mapping (CLI / config file)."""
    kind = config.get("kind", "deterministic_local")
    if kind == "deterministic_local":
        return DeterministicLocalProvider(dim=int(config.get("dim", FALLBACK_DIM)))
    if kind == "remote":
        try:
            return RemoteEmbeddingProvider(
                endpoint_url=config["endpoint_url"],
                model_name=config["model_name"],
                dim=int(config["dim"]),
                api_key_env=config.get("api_key_env", "EMBEDDING_API_KEY"),
            )
        except KeyError as exc:
            raise ConfigError(f"remote provider config missing {exc.args[0]}") from None
    raise ConfigError(f"unknown provider kind: {kind!r}")
