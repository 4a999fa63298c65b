"""In-process task runtime with per-worker object stores.

A :class:`Runtime` owns ``num_workers`` workers. Each worker is a thread
pool with its own object store; values live in exactly one store at a
time. Tasks are submitted from a single coordinator thread and run on a
worker chosen either explicitly or by :meth:`Runtime.locality_schedule`.

Every cost the experiments care about is counted exactly:

* a task input that is not on the executing worker is fetched there and
  counted as one transfer (the fetched copy only lives for the task);
* :meth:`Runtime.transfer` moves ownership of a value between stores;
* each submission adds ``sched_overhead`` virtual nanoseconds.

Whether an input is a locality hit or a transfer is decided at submission
time from the ownership directory, so counters never depend on thread
interleaving.
"""
from __future__ import annotations

import copy
import itertools
import logging
import pickle
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "RuntimeConfig",
    "DataRef",
    "Future",
    "Metrics",
    "Runtime",
    "TaskRuntimeError",
    "DanglingReferenceError",
    "UnknownWorkerError",
    "start_runtime",
    "payload_nbytes",
]


class TaskRuntimeError(Exception):
    """Base class for runtime errors."""


class DanglingReferenceError(TaskRuntimeError, LookupError):
    def __init__(self, ref_id):
        super().__init__(f"reference {ref_id} is not live in any worker store")
        self.ref_id = ref_id


class UnknownWorkerError(TaskRuntimeError, ValueError):
    pass


@dataclass(frozen=True)
class RuntimeConfig:
    """Runtime knobs.

    ``bandwidth`` is in bytes per second; ``None`` means unlimited.
    ``sched_overhead`` and ``latency`` are virtual nanoseconds.
    """

    num_workers: int
    threads_per_worker: int = 1
    sched_overhead: int = 0
    bandwidth: float | None = None
    latency: int = 0
    inject_real_overhead: bool = False

    def __post_init__(self):
        if self.num_workers < 1:
            raise ValueError("num_workers must be >= 1")
        if self.threads_per_worker < 1:
            raise ValueError("threads_per_worker must be >= 1")
        if self.sched_overhead < 0 or self.latency < 0:
            raise ValueError("overheads must be non-negative")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive or None (unlimited)")


@dataclass(frozen=True)
class DataRef:
    """Handle to a value held by one worker store.

    ``owner`` is the owner when the handle was issued; ask the runtime
    (:meth:`Runtime.who_has`) for the current one.
    """

    id: int
    owner: int
    size_bytes: int


@dataclass
class Metrics:
    tasks_submitted: int = 0
    tasks_by_kind: dict = field(default_factory=dict)
    bytes_transferred: int = 0
    transfers: int = 0
    locality_hits: int = 0
    accounted_overhead: int = 0
    overhead_by_kind: dict = field(default_factory=dict)
    virtual_transfer_time: int = 0
    # bytes of values created by put() (dataset blocks) that crossed workers
    block_bytes_transferred: int = 0
    copied_bytes: int = 0
    gathers: int = 0
    gathered_bytes: int = 0

    def copy(self):
        return copy.deepcopy(self)

    def __sub__(self, other):
        out = Metrics()
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, dict):
                keys = set(a) | set(b)
                delta = {k: a.get(k, 0) - b.get(k, 0) for k in sorted(keys)}
                setattr(out, f.name, {k: v for k, v in delta.items() if v})
            else:
                setattr(out, f.name, a - b)
        return out

    def as_dict(self):
        return {f.name: copy.copy(getattr(self, f.name)) for f in fields(self)}


def payload_nbytes(value):
    """Byte size used for transfer accounting."""
    if value is None:
        return 0
    if isinstance(value, np.ndarray):
        return int(value.nbytes)
    if isinstance(value, np.generic):
        return int(value.itemsize)
    if isinstance(value, (bool, int, float)):
        return 8
    if isinstance(value, (bytes, bytearray, memoryview)):
        return len(value)
    if isinstance(value, (tuple, list)):
        return sum(payload_nbytes(v) for v in value)
    if isinstance(value, dict):
        return sum(payload_nbytes(v) for v in value.values())
    nbytes = getattr(value, "nbytes", None)
    if nbytes is not None:
        return int(nbytes)
    return len(pickle.dumps(value, protocol=pickle.HIGHEST_PROTOCOL))


class Future:
    """Wait-able handle on a submitted task.

    State only moves forward: pending -> running -> done | failed.
    """

    def __init__(self, task_id, kind, worker, ref_id):
        self.task_id = task_id
        self.kind = kind
        self.worker = worker
        self.ref_id = ref_id
        self._state = "pending"
        self._ref = None
        self._error = None
        self._event = threading.Event()

    def __repr__(self):
        return f"<Future task={self.task_id} kind={self.kind} worker={self.worker} {self._state}>"

    @property
    def state(self):
        return self._state

    @property
    def ref(self):
        """Result :class:`DataRef` once done, else ``None``."""
        return self._ref

    def done(self):
        return self._event.is_set()

    def wait(self, timeout=None):
        if not self._event.wait(timeout):
            raise TimeoutError(f"task {self.task_id} not finished after {timeout}s")
        return self._state

    def exception(self):
        self.wait()
        return self._error

    def _set_running(self):
        if self._state == "pending":
            self._state = "running"

    def _set_done(self, ref):
        if self._event.is_set():
            raise TaskRuntimeError(f"task {self.task_id} resolved twice")
        self._ref = ref
        self._state = "done"
        self._event.set()

    def _set_failed(self, error):
        if self._event.is_set():
            raise TaskRuntimeError(f"task {self.task_id} resolved twice")
        self._error = error
        self._state = "failed"
        self._event.set()


class _Input:
    __slots__ = ("ref_id", "value", "producer", "fetch", "size_known")

    def __init__(self, ref_id, value, producer, fetch, size_known):
        self.ref_id = ref_id
        self.value = value
        self.producer = producer
        self.fetch = fetch
        self.size_known = size_known


class Runtime:
    """Coordinator plus ``num_workers`` thread-pool workers."""

    def __init__(self, config: RuntimeConfig):
        self.config = config
        n = config.num_workers
        try:
            self._executors = [
                ThreadPoolExecutor(config.threads_per_worker, thread_name_prefix=f"worker{w}")
                for w in range(n)
            ]
        except (RuntimeError, MemoryError) as exc:
            raise TaskRuntimeError(f"could not start {n} workers: {exc}") from exc
        self._stores = [dict() for _ in range(n)]
        self._owner = {}
        self._sizes = {}
        self._origin = {}
        self._producers = {}
        self._futures = []
        self._lock = threading.RLock()
        self._metrics = Metrics()
        self._ids = itertools.count(1)
        self._task_ids = itertools.count(1)
        self._rr = 0
        self._closed = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()

    def __repr__(self):
        return f"<Runtime workers={self.num_workers} threads={self.config.threads_per_worker}>"

    @property
    def num_workers(self):
        return self.config.num_workers

    @property
    def workers(self):
        return list(range(self.config.num_workers))

    def _check_worker(self, worker):
        if not isinstance(worker, (int, np.integer)) or not 0 <= worker < self.num_workers:
            raise UnknownWorkerError(f"unknown worker {worker!r} (have {self.num_workers})")
        return int(worker)

    @staticmethod
    def _ref_id(item):
        if isinstance(item, Future):
            return item.ref_id
        if isinstance(item, DataRef):
            return item.id
        raise TypeError(f"expected DataRef or Future, got {type(item).__name__}")

    # -- store ------------------------------------------------------------

    def put(self, value, worker) -> DataRef:
        """Store ``value`` on ``worker``. Not counted as a transfer."""
        worker = self._check_worker(worker)
        size = payload_nbytes(value)
        with self._lock:
            ref_id = next(self._ids)
            self._stores[worker][ref_id] = value
            self._owner[ref_id] = worker
            self._sizes[ref_id] = size
            self._origin[ref_id] = "put"
        return DataRef(ref_id, worker, size)

    def who_has(self, refs):
        """Current owner of each ref, in order."""
        with self._lock:
            out = []
            for item in refs:
                ref_id = self._ref_id(item)
                try:
                    out.append(self._owner[ref_id])
                except KeyError:
                    raise DanglingReferenceError(ref_id) from None
            return out

    def free(self, refs):
        """Drop values from their stores; later use of the refs is an error."""
        with self._lock:
            for item in refs:
                ref_id = self._ref_id(item)
                owner = self._owner.pop(ref_id, None)
                if owner is not None:
                    self._stores[owner].pop(ref_id, None)
                self._sizes.pop(ref_id, None)

    def _count_transfer(self, ref_id, size):
        m = self._metrics
        m.bytes_transferred += size
        if self._origin.get(ref_id) == "put":
            m.block_bytes_transferred += size
        m.virtual_transfer_time += self._transfer_ns(size)

    def _transfer_ns(self, size):
        bw = self.config.bandwidth
        cost = self.config.latency
        if bw is not None:
            cost += int(round(size * 1e9 / bw))
        return cost

    def transfer(self, ref, dst) -> DataRef:
        """Move the value behind ``ref`` to ``dst``'s store.

        The identifier is kept; the returned handle carries the new owner.
        A transfer to the current owner is a no-op with no accounting.
        """
        dst = self._check_worker(dst)
        ref_id = self._ref_id(ref)
        producer = self._producers.get(ref_id)
        if producer is not None:
            producer.wait()
        with self._lock:
            src = self._owner.get(ref_id)
            if src is None or ref_id not in self._stores[src]:
                raise DanglingReferenceError(ref_id)
            size = self._sizes[ref_id]
            if src != dst:
                self._stores[dst][ref_id] = self._stores[src].pop(ref_id)
                self._owner[ref_id] = dst
                self._metrics.transfers += 1
                self._count_transfer(ref_id, size)
        return DataRef(ref_id, dst, size)

    # -- scheduling ---------------------------------------------------------

    def locality_schedule(self, inputs) -> int:
        """Worker holding the most input bytes; ties go to the lowest id.

        Results of unfinished tasks weigh zero bytes (their size is not
        known yet) but still make their worker a candidate. With no
        inputs, workers are chosen round-robin.
        """
        with self._lock:
            if not inputs:
                worker = self._rr % self.num_workers
                self._rr += 1
                return worker
            weight = {}
            for item in inputs:
                ref_id = self._ref_id(item)
                owner = self._owner.get(ref_id)
                if owner is None:
                    continue
                weight[owner] = weight.get(owner, 0) + self._sizes.get(ref_id, 0)
            if not weight:
                return 0
            return min(weight, key=lambda w: (-weight[w], w))

    def submit(self, kind, func, inputs=(), worker=None) -> Future:
        """Run ``func(*input_values)`` as a task of the given kind.

        ``inputs`` are :class:`DataRef` or :class:`Future` objects; their
        values are passed positionally. Without ``worker`` the task goes
        to :meth:`locality_schedule`.
        """
        inputs = list(inputs)
        if worker is None:
            worker = self.locality_schedule(inputs)
        else:
            worker = self._check_worker(worker)
        cfg = self.config
        with self._lock:
            if self._closed:
                raise TaskRuntimeError("runtime is shut down")
            task_id = next(self._task_ids)
            result_id = next(self._ids)
            fut = Future(task_id, kind, worker, result_id)
            m = self._metrics
            m.tasks_submitted += 1
            m.tasks_by_kind[kind] = m.tasks_by_kind.get(kind, 0) + 1
            m.accounted_overhead += cfg.sched_overhead
            m.overhead_by_kind[kind] = m.overhead_by_kind.get(kind, 0) + cfg.sched_overhead

            specs = []
            error = None
            for item in inputs:
                ref_id = self._ref_id(item)
                if isinstance(item, Future) and item.state == "failed":
                    error = item._error
                    break
                src = self._owner.get(ref_id)
                if src is None:
                    if isinstance(item, Future) and item.state == "failed":
                        error = item._error
                    else:
                        error = DanglingReferenceError(ref_id)
                    break
                producer = self._producers.get(ref_id)
                value = None
                size_known = ref_id in self._sizes
                if producer is None:
                    value = self._stores[src][ref_id]
                fetch = src != worker
                if fetch:
                    m.transfers += 1
                    if size_known:
                        self._count_transfer(ref_id, self._sizes[ref_id])
                else:
                    m.locality_hits += 1
                specs.append(_Input(ref_id, value, producer, fetch, size_known))

            if error is not None:
                fut._set_failed(error)
                return fut
            self._owner[result_id] = worker
            self._origin[result_id] = "task"
            self._producers[result_id] = fut
            self._futures.append(fut)

        self._executors[worker].submit(self._run, fut, func, specs)
        if cfg.inject_real_overhead and cfg.sched_overhead:
            time.sleep(cfg.sched_overhead / 1e9)
        return fut

    def _run(self, fut, func, specs):
        fut._set_running()
        try:
            values = []
            for spec in specs:
                value = spec.value
                if spec.producer is not None:
                    spec.producer.wait()
                    if spec.producer.state == "failed":
                        raise spec.producer._error
                    with self._lock:
                        owner = self._owner.get(spec.ref_id)
                        if owner is None:
                            raise DanglingReferenceError(spec.ref_id)
                        value = self._stores[owner][spec.ref_id]
                        if spec.fetch and not spec.size_known:
                            self._count_transfer(spec.ref_id, self._sizes[spec.ref_id])
                values.append(value)
            result = func(*values)
            size = payload_nbytes(result)
            with self._lock:
                owner = self._owner.get(fut.ref_id)
                if owner is not None:  # None: freed while pending
                    self._stores[owner][fut.ref_id] = result
                    self._sizes[fut.ref_id] = size
                self._producers.pop(fut.ref_id, None)
            fut._set_done(DataRef(fut.ref_id, fut.worker, size))
        except BaseException as exc:  # noqa: BLE001 - surfaced through the future
            logger.debug("task %s (%s) failed: %r", fut.task_id, fut.kind, exc)
            with self._lock:
                self._owner.pop(fut.ref_id, None)
                self._producers.pop(fut.ref_id, None)
                fut._set_failed(exc)

    # -- results --------------------------------------------------------------

    def gather(self, item):
        """Copy of a task result (or stored value) at the coordinator.

        Re-raises the task's exception if it failed.
        """
        if isinstance(item, Future):
            item.wait()
            if item.state == "failed":
                raise item._error
        ref_id = self._ref_id(item)
        with self._lock:
            owner = self._owner.get(ref_id)
            if owner is None or ref_id not in self._stores[owner]:
                raise DanglingReferenceError(ref_id)
            value = self._stores[owner][ref_id]
            self._metrics.gathers += 1
            self._metrics.gathered_bytes += self._sizes[ref_id]
        if isinstance(value, np.ndarray):
            return value.copy()
        return copy.deepcopy(value)

    def peek(self, item):
        """Read a stored value in place, without accounting. Debug/verification only."""
        if isinstance(item, Future):
            item.wait()
            if item.state == "failed":
                raise item._error
        ref_id = self._ref_id(item)
        with self._lock:
            owner = self._owner.get(ref_id)
            if owner is None or ref_id not in self._stores[owner]:
                raise DanglingReferenceError(ref_id)
            return self._stores[owner][ref_id]

    def add_copied_bytes(self, n):
        with self._lock:
            self._metrics.copied_bytes += int(n)

    def wait_all(self):
        """Block until every submitted task reached a terminal state."""
        with self._lock:
            pending = list(self._futures)
            self._futures = []
        for fut in pending:
            fut.wait()

    def metrics_snapshot(self) -> Metrics:
        with self._lock:
            return self._metrics.copy()

    def store_size(self, worker):
        """Number of values held by ``worker``."""
        worker = self._check_worker(worker)
        with self._lock:
            return len(self._stores[worker])

    def shutdown(self):
        if self._closed:
            return
        self._closed = True
        for ex in self._executors:
            ex.shutdown(wait=True)


def start_runtime(config: RuntimeConfig) -> Runtime:
    return Runtime(config)
