"""Morphology-aware sequence models for dependency parsing, named-entity
recognition and comment filtering, with embedded UPOS tags and universal
features as optional per-token inputs."""

__version__ = "0.1.0"
