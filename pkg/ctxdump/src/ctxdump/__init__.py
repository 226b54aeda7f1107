"""Per-token, per-layer transformer hidden-state extraction into the CTXD
binary format consumed by downstream sequence models."""

__version__ = "0.1.0"
