"""Multimodal optimization via annealed natural-gradient mixture search."""

__version__ = "0.1.0"
