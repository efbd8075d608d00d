"""Sentence encoding: pretrained transformer, mean pooling, L2 norm."""

from __future__ import annotations

import torch
from transformers import AutoModel, AutoTokenizer

# inputs longer than this are truncated before tokenization
MAX_TEXT_CHARS = 8192


class SentenceEncoder:
    """Wraps a transformers checkpoint (hub name or local path).

    encode() returns one L2-normalized mean-pooled vector per text.
    The model runs in eval mode, so identical inputs give identical
    vectors.
    """

    def __init__(self, model_name: str):
        self.model_name = model_name
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)
        self._max_tokens = min(
            getattr(self.model.config, "max_position_embeddings", 512), 512
        )

    @torch.no_grad()
    def encode(self, texts: list[str]) -> list[list[float]]:
        clipped = [t[:MAX_TEXT_CHARS] for t in texts]
        batch = self.tokenizer(
            clipped,
            padding=True,
            truncation=True,
            max_length=self._max_tokens,
            return_tensors="pt",
        )
        hidden = self.model(**batch).last_hidden_state  # (n, tokens, dim)
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        summed = (hidden * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1.0)
        pooled = summed / counts
        normed = torch.nn.functional.normalize(pooled, p=2, dim=1)
        return normed.tolist()
