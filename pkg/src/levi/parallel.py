"""Order-preserving thread map used by the averaging sweeps."""
import os
from concurrent.futures import ThreadPoolExecutor

_threads = 1


def set_threads(n=None):
    """Set the worker count; ``None`` means all cores."""
    global _threads
    _threads = max(1, int(n if n is not None else (os.cpu_count() or 1)))
    return _threads


def get_threads():
    return _threads


def pmap(fn, items):
    """``list(map(fn, items))``, spread over the configured threads."""
    items = list(items)
    if _threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(_threads, len(items))) as pool:
        return list(pool.map(fn, items))
