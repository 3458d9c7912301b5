"""Deterministic, schedule-independent random streams.

Every stochastic step in the pipeline derives its own counter-based
generator from a tuple of key parts (global seed, subject id, ordinal,
...). Derivation hashes the parts with SHA-256, so streams are stable
across platforms and process/worker layouts. Python's builtin hash() is
salted per process and must never be used here.
"""

from __future__ import annotations

import hashlib

import numpy as np

KeyPart = int | str


def seed_entropy(*parts: KeyPart) -> int:
    """Collapse key parts into a 128-bit entropy integer."""
    blob = "\x1f".join(f"{type(p).__name__}:{p}" for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:16], "big")


def derive_rng(*parts: KeyPart) -> np.random.Generator:
    """Counter-based generator keyed by the given parts."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed_entropy(*parts))))
