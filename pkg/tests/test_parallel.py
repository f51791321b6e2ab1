import threading

from cgorecon.parallel import map_bounded


def test_preserves_input_order():
    assert map_bounded(lambda x: x * x, range(20), workers=4, progress=False) == [x * x for x in range(20)]


def test_single_worker_runs_inline():
    main = threading.get_ident()
    idents = map_bounded(lambda _: threading.get_ident(), range(3), workers=1, progress=False)
    assert set(idents) == {main}


def test_bounded_concurrency():
    lock = threading.Lock()
    state = {"active": 0, "peak": 0}
    barrier = threading.Event()

    def work(_):
        with lock:
            state["active"] += 1
            state["peak"] = max(state["peak"], state["active"])
        barrier.wait(0.01)
        with lock:
            state["active"] -= 1
        return None

    map_bounded(work, range(12), workers=3, progress=False)
    assert state["peak"] <= 3
