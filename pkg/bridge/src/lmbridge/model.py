"""Small transformer language models: a causal LM for generative scoring and
a bidirectional masked LM for pseudo-likelihood scoring.

Deliberately tiny (a couple of layers, short context) so they pretrain on a
few MB of prose in minutes on a CPU. The zero-shot rule still applies: they
are trained on original-order text only, never on shuffled text.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn

from .vocab import Vocab


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 128
    n_heads: int = 4
    n_layers: int = 2
    d_ff: int = 256
    max_positions: int = 256
    dropout: float = 0.1
    causal: bool = True


class TinyTransformerLM(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.d_model)
        self.position_embedding = nn.Embedding(config.max_positions, config.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=config.d_model, nhead=config.n_heads,
            dim_feedforward=config.d_ff, dropout=config.dropout,
            batch_first=True, norm_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=config.n_layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(config.d_model)
        self.head = nn.Linear(config.d_model, config.vocab_size)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        length = ids.size(1)
        if length > self.config.max_positions:
            raise ValueError(f"sequence of {length} exceeds {self.config.max_positions} positions")
        positions = torch.arange(length, device=ids.device)
        hidden = self.token_embedding(ids) + self.position_embedding(positions)
        mask = None
        if self.config.causal:
            mask = nn.Transformer.generate_square_subsequent_mask(length, device=ids.device)
        hidden = self.encoder(hidden, mask=mask)
        return self.head(self.norm(hidden))


def save_checkpoint(path: str, model: TinyTransformerLM, vocab: Vocab) -> None:
    torch.save(
        {"config": asdict(model.config), "vocab": vocab.itos,
         "state": model.state_dict()},
        path,
    )


def load_checkpoint(path: str) -> tuple[TinyTransformerLM, Vocab]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    config = ModelConfig(**payload["config"])
    model = TinyTransformerLM(config)
    model.load_state_dict(payload["state"])
    model.eval()
    vocab = Vocab.__new__(Vocab)
    vocab.itos = list(payload["vocab"])
    vocab.stoi = {tok: i for i, tok in enumerate(vocab.itos)}
    return model, vocab
