"""Benchmark matrix differential equations."""

from .adr import AdrSpec, adr_model
from .burgers import BurgersSpec, burgers_model, kl_expansion
from .toy import ToySpec, toy_model

__all__ = [
    "AdrSpec",
    "BurgersSpec",
    "ToySpec",
    "adr_model",
    "burgers_model",
    "kl_expansion",
    "toy_model",
]
