# """
# ==============================================================================
# FILE: threads.py
# ROLE: Background Workers
# DESCRIPTION:
# Fans independent numerical cells (one MF-DFA scale, one Levy grid point)
# out over a small pool of named worker threads. Results always come back in
# submission order, so the output never depends on which thread finished
# first. If any cell crashes, the FIRST failure (by submission index) is
# re-raised in the caller; nothing is silently swallowed.
# ==============================================================================
# """

import queue
import logging
import threading

logger = logging.getLogger(__name__)


def run_parallel(func, items, workers=1, name="Worker"):
    """Applies `func` to every item and returns the results in input order."""
    items = list(items)

    # Inline mode: no threads for a single worker or a single item
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    jobs = queue.Queue()
    for index, item in enumerate(items):
        jobs.put((index, item))

    results = [None] * len(items)
    failures = {}
    lock = threading.Lock()

    def worker_loop():
        while True:
            try:
                index, item = jobs.get_nowait()
            except queue.Empty:
                return
            try:
                results[index] = func(item)
            except Exception as e:
                with lock:
                    failures[index] = e
                logger.debug(f"[{name}] Cell {index} failed: {e}")

    pool_size = min(workers, len(items))
    pool = [
        threading.Thread(target=worker_loop, name=f"{name}-{i + 1}", daemon=True)
        for i in range(pool_size)
    ]
    for t in pool:
        t.start()
    for t in pool:
        t.join()

    if failures:
        raise failures[min(failures)]
    return results
