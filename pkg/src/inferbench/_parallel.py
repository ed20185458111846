"""Process-pool map over a read-only object shared by fork."""

import multiprocessing as mp

_SHARED = None


def shared():
    return _SHARED


def map_shared(fn, items, obj, workers):
    """``[fn(x) for x in items]`` in ``workers`` forked processes.

    ``obj`` is visible to ``fn`` through :func:`shared`.  Falls back to a
    serial loop where fork is unavailable.  Output order follows ``items``.
    """
    global _SHARED
    _SHARED = obj
    try:
        try:
            ctx = mp.get_context("fork")
        except ValueError:
            return [fn(x) for x in items]
        with ctx.Pool(workers) as pool:
            return pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers)))
    finally:
        _SHARED = None
