"""Experiment records, timing and parameter sweeps."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable

from .algorithms import ShiftStrategy, algo_dispatch
from .errors import BreakdownError, QrkitError, UnknownAlgorithm
from .kernels import jacobi_svd
from .matrix import g_measure
from .metrics import accuracy
from .testmat import MatrixSpec, realize

__all__ = [
    "CSV_HEADER",
    "ExperimentRecord",
    "run_experiment",
    "time_algorithm",
    "SweepConfig",
    "run_sweep",
    "summarize",
    "format_csv_row",
    "write_records",
]

log = logging.getLogger(__name__)

CSV_HEADER = (
    "algorithm,m,n,kappa_target,seed,shift_s,p,orth_fro,resid_fro,kappa_q,time_ms,status,trial_index"
)
STATUSES = ("ok", "breakdown_stage1", "breakdown_stage2", "breakdown_stage3", "error")

# Timed sections never overlap, even when sweep trials run on several threads.
_TIMING_LOCK = threading.Lock()


@dataclass
class ExperimentRecord:
    algorithm: str
    m: int
    n: int
    kappa_target: float | None
    seed: int
    shift_s: float | None
    p: float | None
    orth_fro: float | None
    resid_fro: float | None
    kappa_q: float | None
    time_ms: float
    status: str
    trial_index: int = 0
    message: str = field(default="", compare=False)

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            if f.name == "message":
                continue
            v = getattr(self, f.name)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return out

    def as_json(self) -> str:
        d = asdict(self)
        if not d["message"]:
            del d["message"]
        return json.dumps(d)


def format_csv_row(rec: ExperimentRecord) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(rec.row())
    return buf.getvalue()


def _measure_p(X) -> float:
    return g_measure(X).value / jacobi_svd(X).sigma_max


def run_experiment(
    spec: MatrixSpec,
    algo: str,
    strategy: ShiftStrategy | None = None,
    trial_index: int = 0,
    repeats: int | None = None,
    X=None,
    p: float | None = None,
) -> ExperimentRecord:
    """Factor one matrix with one algorithm and record the outcome.

    Breakdown is a normal outcome (``status = breakdown_stageK``); only
    unexpected failures give ``status = error``.  Passing a pre-built ``X``
    (and its ``p``) skips regeneration.
    """
    if X is None:
        X = realize(spec).X
    m, n = X.shape
    if p is None:
        p = _measure_p(X)
    kappa_target = float(spec.kappa) if spec.kind == "svd" else None
    base = dict(
        algorithm=algo, m=m, n=n, kappa_target=kappa_target, seed=spec.seed,
        p=p, trial_index=trial_index,
    )
    with _TIMING_LOCK:
        t0 = time.perf_counter()
        try:
            result = algo_dispatch(algo, X, strategy)
            failure = None
        except UnknownAlgorithm:
            raise
        except (BreakdownError, QrkitError, ArithmeticError, ValueError) as exc:
            result, failure = None, exc
        elapsed = (time.perf_counter() - t0) * 1e3
    if repeats is not None:
        elapsed = time_algorithm(algo, X, repeats, strategy)

    if isinstance(failure, BreakdownError):
        shift_s = failure.shift_info.s if failure.shift_info is not None else None
        return ExperimentRecord(
            **base, shift_s=shift_s, orth_fro=None, resid_fro=None, kappa_q=None,
            time_ms=elapsed, status=f"breakdown_stage{int(failure.stage)}", message=str(failure),
        )
    if failure is not None:
        return ExperimentRecord(
            **base, shift_s=None, orth_fro=None, resid_fro=None, kappa_q=None,
            time_ms=elapsed, status="error", message=f"{type(failure).__name__}: {failure}",
        )
    acc = accuracy(X, result)
    shift_s = result.shift_info.s if result.shift_info is not None else None
    return ExperimentRecord(
        **base, shift_s=shift_s, orth_fro=acc.orth_fro, resid_fro=acc.resid_fro,
        kappa_q=acc.kappa_q, time_ms=elapsed, status="ok",
    )


def time_algorithm(algo: str, X, repeats: int = 5, strategy: ShiftStrategy | None = None) -> float:
    """Median wall-clock milliseconds over ``repeats`` runs after one warm-up.

    A breakdown still counts as a completed (timed) run.
    """
    if repeats < 3:
        raise ValueError("repeats must be >= 3")

    def once() -> float:
        t0 = time.perf_counter()
        try:
            algo_dispatch(algo, X, strategy)
        except BreakdownError:
            pass
        return (time.perf_counter() - t0) * 1e3

    with _TIMING_LOCK:
        once()
        samples = [once() for _ in range(repeats)]
    return statistics.median(samples)


VARY = ("kappa", "m", "n")


@dataclass
class SweepConfig:
    vary: str
    values: list
    algos: list
    m: int | None = None
    n: int | None = None
    kappa: float | None = None
    trials: int = 5
    base_seed: int = 0
    kind: str = "svd"
    strategy: ShiftStrategy | None = None

    def __post_init__(self):
        if self.vary not in VARY:
            raise ValueError(f"vary must be one of {VARY}")
        if not self.values:
            raise ValueError("values must be nonempty")
        if any(not (v > 0) for v in self.values):
            raise ValueError("values must be positive")
        if not self.algos:
            raise ValueError("algos must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kind not in ("svd", "hilbert", "arrowhead"):
            raise ValueError(f"cannot sweep matrix kind {self.kind!r}")
        if self.kind != "svd" and self.vary != "n":
            raise ValueError(f"{self.kind} matrices can only vary n")
        # Build every spec once to surface size errors before any work starts.
        for v in self.values:
            try:
                self.spec_for(v, 0)
            except TypeError:
                raise ValueError("m, n and kappa must be given for the fixed parameters") from None

    def spec_for(self, value, trial: int) -> MatrixSpec:
        params = {"m": self.m, "n": self.n, "kappa": self.kappa}
        params[self.vary] = value
        if self.kind == "svd":
            return MatrixSpec(
                "svd", m=int(params["m"]), n=int(params["n"]), kappa=float(params["kappa"]),
                seed=self.base_seed + trial,
            )
        return MatrixSpec(self.kind, n=int(params["n"]), seed=self.base_seed + trial)


def _thread_count() -> int:
    env = os.environ.get("QRKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring invalid QRKIT_THREADS=%r", env)
    return os.cpu_count() or 1


def run_sweep(
    config: SweepConfig,
    on_record: Callable[[ExperimentRecord], None] | None = None,
    threads: int | None = None,
) -> list[ExperimentRecord]:
    """Run every (value, algorithm, trial) cell of ``config``.

    Trial ``i`` uses seed ``base_seed + i``.  Records are passed to
    ``on_record`` as they complete; the returned list is ordered by
    (value, algorithm, trial) as given in the config.
    """
    threads = threads or _thread_count()
    tasks = [(vi, ti) for vi in range(len(config.values)) for ti in range(config.trials)]

    def work(vi: int, ti: int) -> list[tuple[tuple, ExperimentRecord]]:
        spec = config.spec_for(config.values[vi], ti)
        X = realize(spec).X
        p = _measure_p(X)
        out = []
        for ai, algo in enumerate(config.algos):
            rec = run_experiment(spec, algo, config.strategy, trial_index=ti, X=X, p=p)
            out.append(((vi, ai, ti), rec))
        return out

    keyed: list[tuple[tuple, ExperimentRecord]] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work, vi, ti) for vi, ti in tasks]
        for fut in as_completed(futures):
            for key, rec in fut.result():
                keyed.append((key, rec))
                if on_record is not None:
                    on_record(rec)
    keyed.sort(key=lambda kr: kr[0])
    return [rec for _, rec in keyed]


def _median(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return statistics.median(vals) if vals else None


def summarize(records: list[ExperimentRecord], vary: str) -> list[dict]:
    """Median of each metric per (swept value, algorithm) cell."""
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        value = {"kappa": r.kappa_target, "m": r.m, "n": r.n}[vary]
        cells.setdefault((value, r.algorithm), []).append(r)
    out = []
    for (value, algo), recs in cells.items():
        ok = [r for r in recs if r.status == "ok"]
        out.append(
            {
                vary: value,
                "algorithm": algo,
                "ok": len(ok),
                "trials": len(recs),
                "orth_fro": _median(r.orth_fro for r in ok),
                "resid_fro": _median(r.resid_fro for r in ok),
                "kappa_q": _median(r.kappa_q for r in ok),
                "p": _median(r.p for r in recs),
                "time_ms": _median(r.time_ms for r in recs),
            }
        )
    return out


def format_summary(rows: list[dict], vary: str) -> str:
    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.3g}" if math.isfinite(v) else str(v)
        return str(v)

    cols = [vary, "algorithm", "ok", "trials", "orth_fro", "resid_fro", "kappa_q", "p", "time_ms"]
    table = [cols] + [[fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in table)


def write_records(fh, records: Iterable[ExperimentRecord], as_json: bool = False, header: bool = True) -> None:
    if not as_json and header:
        fh.write(CSV_HEADER + "\n")
    for rec in records:
        fh.write(rec.as_json() + "\n" if as_json else format_csv_row(rec))
