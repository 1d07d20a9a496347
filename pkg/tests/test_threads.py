import threading
import time

import pytest

from threads import run_parallel


def test_results_keep_submission_order():
    def slow_square(x):
        time.sleep(0.001 * (10 - x))
        return x * x

    assert run_parallel(slow_square, range(10), workers=4) == [x * x for x in range(10)]


def test_inline_for_one_worker():
    names = run_parallel(lambda _: threading.current_thread().name, range(3), workers=1)
    assert set(names) == {threading.current_thread().name}


def test_worker_threads_are_named():
    names = run_parallel(lambda _: threading.current_thread().name, range(8), workers=3, name="Scale")
    assert all(n.startswith("Scale-") for n in names)


def test_first_failure_by_index_is_raised():
    def fail_on_odd(x):
        if x % 2:
            raise ValueError(f"cell {x}")
        return x

    with pytest.raises(ValueError, match="cell 1"):
        run_parallel(fail_on_odd, range(6), workers=3)


def test_empty_input():
    assert run_parallel(abs, [], workers=4) == []
