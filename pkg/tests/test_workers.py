import threading

import pytest

from src.utils.workers import THREADS_ENV_VAR, derive_rng, run_ordered, thread_limit


def test_derived_streams_depend_only_on_seed_and_index():
    a = derive_rng(7, 3).standard_normal(4)
    b = derive_rng(7, 3).standard_normal(4)
    c = derive_rng(7, 4).standard_normal(4)
    assert (a == b).all()
    assert not (a == c).all()


def test_thread_limit_precedence(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "3")
    assert thread_limit(5) == 5
    assert thread_limit() == 3
    monkeypatch.setenv(THREADS_ENV_VAR, "zero")
    assert thread_limit() >= 1
    monkeypatch.setenv(THREADS_ENV_VAR, "-2")
    assert thread_limit() >= 1


@pytest.mark.parametrize("threads", [1, 4])
def test_run_ordered_keeps_input_order(threads):
    seen = set()

    def task(i):
        seen.add(threading.current_thread().name)
        return i * i

    assert run_ordered(task, list(range(20)), threads) == [i * i for i in range(20)]
    if threads == 1:
        assert seen == {threading.current_thread().name}


def test_run_ordered_empty():
    assert run_ordered(lambda i: i, [], 4) == []
