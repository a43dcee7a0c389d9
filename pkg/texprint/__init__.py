"""Latent-fingerprint identification from core-anchored texture descriptors."""

__version__ = "0.1.0"
