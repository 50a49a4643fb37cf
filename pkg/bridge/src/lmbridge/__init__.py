"""Reference external-scorer provider: tiny pretrained causal and masked
LMs behind the newline-delimited JSON scoring protocol."""

__version__ = "0.1.0"

from .model import ModelConfig, TinyTransformerLM, load_checkpoint, save_checkpoint
from .scorer import BridgeScorer, window_spans
from .train import train_model
from .vocab import Vocab, tokenize

__all__ = [
    "BridgeScorer", "ModelConfig", "TinyTransformerLM", "Vocab",
    "load_checkpoint", "save_checkpoint", "tokenize", "train_model",
    "window_spans",
]
