"""Deterministic seed derivation shared by every randomized component.

All randomness in the package flows from one root seed through blake2b;
Python's builtin hash() is per-process salted and must never be used here.
"""
from __future__ import annotations

import hashlib
import struct

_MASK64 = (1 << 64) - 1


def derive_seed(root: int, *parts: int | str | bytes) -> int:
    """Derive a child 64-bit seed from a root seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack(">Q", root & _MASK64))
    for part in parts:
        if isinstance(part, bool):  # bool is an int; keep the encoding unambiguous
            part = int(part)
        if isinstance(part, int):
            h.update(b"i" + struct.pack(">q", part))
        elif isinstance(part, str):
            raw = part.encode("utf-8")
            h.update(b"s" + struct.pack(">I", len(raw)) + raw)
        else:
            h.update(b"b" + struct.pack(">I", len(part)) + part)
    return int.from_bytes(h.digest(), "big")
