import os
from concurrent.futures import ThreadPoolExecutor


def max_threads():
    """Thread cap from ``TP_THREADS``; defaults to the number of cores."""
    raw = os.environ.get("TP_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Ordered map over ``items``; results never depend on scheduling."""
    items = list(items)
    threads = min(max_threads(), len(items))
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
