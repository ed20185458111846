"""Deterministic per-item random generators.

Every random choice is drawn from a generator derived from the master seed
plus stable item labels, so results never depend on iteration order or on
how work is split across processes.
"""

import hashlib
import random


def derive_seed(master: int, *parts) -> int:
    h = hashlib.sha256(repr(int(master)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(str(p).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(master: int, *parts) -> random.Random:
    return random.Random(derive_seed(master, *parts))
