"""Sentence-embedding providers and cosine similarity.

Two interchangeable providers sit behind the same contract (fixed
dimensionality, deterministic text -> vector):

* ``FallbackEmbedder`` — offline, feature-hashed bag of stemmed tokens.
  Each token's stable hash selects a bucket and a sign; the result is
  L2-normalized. Byte-identical text gives bit-identical vectors on
  every platform, so the whole pipeline runs with no model and no
  network.
* ``RemoteEmbedder`` — client for an HTTP service implementing
  ``POST /embed`` with body ``{"texts": [...]}`` and response
  ``{"dim": D, "vectors": [[...], ...]}``. Responses are cached on disk
  keyed by (provider id, content hash of text) so a full-corpus
  extraction is resumable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from typing import Protocol, Sequence

import numpy as np
import requests

from .errors import DimensionMismatch, LengthMismatch, RemoteUnavailable
from .textprep import tokenize

logger = logging.getLogger(__name__)

FALLBACK_DIM = 256


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u, v) / (|u| |v|), clamped to [-1, 1]; 0 if either norm is 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatch(u.size, v.size)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def semantic_similarity(provider: EmbeddingProvider, text1: str, text2: str) -> float:
    """Cosine of the two embedded texts; always in [-1, 1]."""
    return cosine(provider.embed(text1), provider.embed(text2))


def _token_hash(token: str) -> tuple[int, float]:
    """Stable (bucket seed, sign) pair; hashlib keeps it platform-independent."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16).digest()
    bucket_seed = int.from_bytes(digest[:8], "big")
    sign = 1.0 if digest[8] & 1 else -1.0
    return bucket_seed, sign


class FallbackEmbedder:
    """Deterministic offline embedder: hashed bag of stemmed tokens."""

    kind = "fallback"

    def __init__(self, dim: int = FALLBACK_DIM):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokenize(text):
            bucket_seed, sign = _token_hash(token)
            vec[bucket_seed % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            vec /= norm
        return vec

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """Client for the embedding service wire protocol, with a disk cache.

    Requests are retried idempotently with exponential backoff
    (``attempts`` tries) before raising RemoteUnavailable. The cache
    directory may be shared between processes; writes are atomic
    (tempfile + rename) and serialized per process.
    """

    kind = "remote"

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        cache_dir: str | None = None,
        batch_size: int = 64,
        attempts: int = 3,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.batch_size = min(batch_size, 256)
        self.attempts = attempts
        self.backoff = backoff
        self.dim: int | None = None
        self._provider_id = hashlib.sha256(self.endpoint.encode("utf-8")).hexdigest()[:16]
        self._cache_dir = None
        if cache_dir:
            self._cache_dir = os.path.join(cache_dir, self._provider_id)
            os.makedirs(self._cache_dir, exist_ok=True)
        self._lock = threading.Lock()
        self._session = requests.Session()

    def _cache_path(self, text: str) -> str | None:
        if self._cache_dir is None:
            return None
        key = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return os.path.join(self._cache_dir, key + ".json")

    def _cache_get(self, text: str) -> np.ndarray | None:
        path = self._cache_path(text)
        if path is None or not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return np.asarray(json.load(fh), dtype=np.float64)

    def _cache_put(self, text: str, vec: np.ndarray) -> None:
        path = self._cache_path(text)
        if path is None:
            return
        with self._lock:
            fd, tmp = tempfile.mkstemp(dir=self._cache_dir, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(vec.tolist(), fh)
            os.replace(tmp, path)

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            try:
                resp = self._session.post(
                    self.endpoint + "/embed",
                    json={"texts": texts},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                payload = resp.json()
                break
            except (requests.RequestException, ValueError) as e:
                last_error = e
                if attempt + 1 < self.attempts:
                    time.sleep(self.backoff * (2**attempt))
        else:
            raise RemoteUnavailable(
                f"{self.endpoint}/embed failed after {self.attempts} attempts: {last_error}"
            )
        dim = int(payload["dim"])
        vectors = payload["vectors"]
        if len(vectors) != len(texts):
            raise DimensionMismatch(len(texts), len(vectors), "response vector count")
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise DimensionMismatch(self.dim, dim, "response dim changed")
        out = []
        for vec in vectors:
            if len(vec) != self.dim:
                raise DimensionMismatch(self.dim, len(vec), "vector length")
            out.append(np.asarray(vec, dtype=np.float64))
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        results: dict[int, np.ndarray] = {}
        missing: list[int] = []
        for i, text in enumerate(texts):
            cached = self._cache_get(text)
            if cached is not None:
                if self.dim is None:
                    self.dim = cached.size
                results[i] = cached
            else:
                missing.append(i)
        for start in range(0, len(missing), self.batch_size):
            chunk = missing[start : start + self.batch_size]
            vectors = self._post([texts[i] for i in chunk])
            for i, vec in zip(chunk, vectors):
                self._cache_put(texts[i], vec)
                results[i] = vec
        return [results[i] for i in range(len(texts))]


def make_provider(
    kind: str,
    endpoint: str | None = None,
    timeout: float = 30.0,
    cache_dir: str | None = None,
    dim: int = FALLBACK_DIM,
) -> EmbeddingProvider:
    """Build a provider from configuration strings (CLI plumbing)."""
    if kind == "fallback":
        return FallbackEmbedder(dim=dim)
    if kind == "remote":
        if not endpoint:
            raise ValueError("remote embedder requires an endpoint URL")
        return RemoteEmbedder(endpoint, timeout=timeout, cache_dir=cache_dir)
    raise ValueError(f"unknown embedder kind {kind!r}")
