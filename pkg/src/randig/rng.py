"""Named, splittable random streams on top of the counter-based Philox generator.

Every stream is addressed by a root seed plus a path of labels, e.g.
``stream(seed, "chunk", 3, "arc")``.  The path is hashed into a 128-bit
Philox key, so streams are independent of each other and of evaluation
order: the i-th value of a stream is a pure function of (seed, path, i).
Batch samplers split work into fixed-size chunks with per-chunk streams,
which makes results identical whether chunks run serially or on a thread
pool.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Fixed chunk size for batch sampling; results depend on it, so it never changes.
CHUNK = 1 << 16

_SEP = b"\x1f"


def derive_key(seed: int, *path: int | str) -> int:
    """Hash (seed, *path) into a 128-bit Philox key."""
    h = hashlib.sha256()
    h.update(repr(int(seed)).encode())
    for part in path:
        h.update(_SEP)
        if isinstance(part, str):
            h.update(b"s" + part.encode())
        else:
            h.update(b"i" + repr(int(part)).encode())
    return int.from_bytes(h.digest()[:16], "little")


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Deterministic generator for the stream named by (seed, *path)."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *path)))


def thread_count() -> int:
    """Parallelism cap from RANDIG_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("RANDIG_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def map_chunks(total: int, fn):
    """Apply ``fn(chunk_index, chunk_size)`` over ``total`` items in CHUNK blocks.

    Returns the list of per-chunk results in chunk order.  Chunks may run on a
    thread pool (capped by RANDIG_THREADS) but assembly order is fixed, so the
    output is independent of the thread count.
    """
    sizes = [(c, min(CHUNK, total - c * CHUNK)) for c in range((total + CHUNK - 1) // CHUNK)]
    workers = thread_count()
    if workers <= 1 or len(sizes) <= 1:
        return [fn(c, size) for c, size in sizes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cs: fn(*cs), sizes))
