"""Experiment runner: solve every (instance, algorithm) cell and report gaps to the bounds.

Gaps follow the convention ``100 * (bound - value) / value``: the heuristic
value is the denominator and the tightest available bound is used.  Bounds
in a tour row are on the tour scale, so ``bound_fwp`` there is twice the
star value.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from .exact import LP_CAP, brute_matching, lp_matching_optimum
from .geometry import Instance
from .instances import GeneratorConfig, drop_last_if_odd, generate, load_instance
from .matching import Matching, cross_pairs, matching_local_search
from .tour import cross_tour, tour_local_search
from .weber import fwp_improved, weber_numeric

log = logging.getLogger(__name__)

ALGORITHMS = ("cross", "cross_ls", "cross_tour", "cross_tour_ls", "lp_opt", "brute")
MATCHING_ALGOS = ("cross", "cross_ls", "lp_opt", "brute")
TOUR_ALGOS = ("cross_tour", "cross_tour_ls")
CSV_COLUMNS = ("instance", "n", "algorithm", "value", "bound_fwp", "bound_fwp_prime",
               "bound_2mat", "gap_pct", "time_ms", "seed")


@dataclass
class BenchRecord:
    instance: str
    n: int
    algorithm: str
    value: Optional[float]
    bound_fwp: Optional[float]
    bound_fwp_prime: Optional[float] = None
    bound_2mat: Optional[float] = None
    gap_pct: Optional[float] = None
    time_ms: Optional[float] = None
    seed: Optional[int] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class InstanceSpec:
    """Either a file path or a generator class expanded over ``reps`` seeds."""

    file: Optional[str] = None
    kind: Optional[str] = None
    n: int = 0
    k: int = 5
    cluster_radius: float = 0.05
    seeds: list = field(default_factory=list)

    def label(self) -> str:
        if self.file:
            return self.file
        return f"{self.n}c" if self.kind == "clustered" else f"{self.n}"


@dataclass
class BenchSpec:
    instances: list = field(default_factory=list)
    algorithms: list = field(default_factory=lambda: ["cross"])
    fwp_prime: bool = False
    budget: int = 100_000
    time_limit: Optional[float] = None
    threads: int = 1
    lp_cap: int = LP_CAP

    @classmethod
    def from_dict(cls, d: dict) -> "BenchSpec":
        d = dict(d)
        insts = []
        for item in d.pop("instances", []):
            item = dict(item)
            if "reps" in item:
                first = int(item.pop("seed", 0))
                item["seeds"] = list(range(first, first + int(item.pop("reps"))))
            elif "seed" in item:
                item["seeds"] = [int(item.pop("seed"))]
            insts.append(InstanceSpec(**item))
        spec = cls(instances=insts, **d)
        unknown = set(spec.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        return spec


def _expand(spec: BenchSpec):
    """Yield (label, seed, loader) for every concrete instance, in spec order."""
    for item in spec.instances:
        if item.file:
            yield item.file, None, (lambda path=item.file: load_instance(path))
        else:
            for seed in item.seeds or [0]:
                cfg = GeneratorConfig(item.n, item.kind or "uniform", item.k,
                                      item.cluster_radius, seed)
                yield item.label(), seed, (lambda cfg=cfg: generate(cfg))


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, 1000.0 * (time.perf_counter() - t0)


def gap_pct(value, *bounds) -> Optional[float]:
    live = [b for b in bounds if b is not None]
    if value is None or not live or value <= 0:
        return None
    return 100.0 * (min(live) - value) / value


def _run_instance(label, seed, loader, spec: BenchSpec) -> list:
    try:
        inst = loader()
    except (OSError, ValueError) as exc:
        log.warning("instance %s failed to load: %s", label, exc)
        return [BenchRecord(label, 0, algo, None, None, seed=seed, error=str(exc))
                for algo in spec.algorithms]
    name = inst.name if inst.source == "tsplib" else label
    even = drop_last_if_odd(inst)
    wants_match = any(a in MATCHING_ALGOS for a in spec.algorithms)
    wants_tour = any(a in TOUR_ALGOS for a in spec.algorithms)

    mctx = _BoundContext(even, spec) if wants_match and len(even) >= 2 else None
    tctx = None
    if wants_tour and len(inst) >= 3:
        tctx = mctx if (mctx is not None and len(inst) == len(even)) else _BoundContext(inst, spec)

    out = []
    for algo in spec.algorithms:
        ctx = tctx if algo in TOUR_ALGOS else mctx
        n = len(inst) if algo in TOUR_ALGOS else len(even)
        if ctx is None:
            out.append(BenchRecord(name, n, algo, None, None, seed=seed,
                                   error="instance too small"))
            continue
        try:
            out.append(_run_cell(ctx, algo, name, seed, spec))
        except (ValueError, AssertionError) as exc:
            log.warning("%s / %s failed: %s", name, algo, exc)
            out.append(BenchRecord(name, n, algo, None, None, seed=seed, error=str(exc)))
    return out


class _BoundContext:
    """Per-instance shared work: the Weber center and the bounds built on it."""

    def __init__(self, inst: Instance, spec: BenchSpec):
        self.inst = inst
        self.pts = inst.points
        self.spec = spec
        self.weber, self.weber_ms = _timed(weber_numeric, self.pts)
        self._fwp_prime = None
        self._lp = None

    @property
    def fwp_prime(self):
        if self.spec.fwp_prime and self._fwp_prime is None:
            self._fwp_prime = fwp_improved(self.pts, self.weber.center)
        return self._fwp_prime

    def lp(self, required: bool = False):
        n = len(self.pts)
        if self._lp is None and n % 2 == 0 and (required or n <= self.spec.lp_cap):
            self._lp = _timed(lp_matching_optimum, self.pts, cap=self.spec.lp_cap)
        return self._lp


def _run_cell(ctx: _BoundContext, algo: str, name, seed, spec: BenchSpec) -> BenchRecord:
    pts = ctx.pts
    n = len(pts)
    fwp = ctx.weber.value
    if algo in TOUR_ALGOS:
        tour, ms = _timed(cross_tour, pts, ctx.weber.center)
        ms += ctx.weber_ms
        if algo == "cross_tour_ls":
            tour, ls_ms = _timed(tour_local_search, pts, tour, spec.budget, seed or 0,
                                 spec.time_limit)
            ms += ls_ms
        fp = ctx.fwp_prime
        lp = ctx.lp()
        b_fwp = 2 * fwp
        b_fp = None if fp is None else 2 * fp
        b_2mat = None if lp is None else 2 * lp[0].value
        return BenchRecord(name, n, algo, tour.value, b_fwp, b_fp, b_2mat,
                           gap_pct(tour.value, b_fwp, b_fp, b_2mat), ms, seed)

    if algo in ("cross", "cross_ls"):
        pairs, ms = _timed(cross_pairs, pts, ctx.weber.center)
        m = Matching.from_pairs(pts, pairs)
        ms += ctx.weber_ms
        if algo == "cross_ls":
            m, ls_ms = _timed(matching_local_search, pts, m, spec.budget, seed or 0,
                              spec.time_limit)
            ms += ls_ms
        value = m.value
    elif algo == "lp_opt":
        res, ms = ctx.lp(required=True)
        value = res.value
    else:
        res, ms = _timed(brute_matching, pts)
        value = res.value
    fp = ctx.fwp_prime
    return BenchRecord(name, n, algo, value, fwp, fp, None, gap_pct(value, fwp, fp), ms, seed)


def run_bench(spec: BenchSpec, out=None) -> list:
    """Run every cell of ``spec``; optionally stream the CSV to the text file ``out``.

    Rows come out in spec order whatever ``spec.threads`` is.  A missing
    file or an oracle cap violation becomes an error row (blank numeric
    fields) and the run continues.
    """
    jobs = list(_expand(spec))
    writer = None
    if out is not None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
    records = []

    def emit(batch):
        records.extend(batch)
        if writer is not None:
            for rec in batch:
                writer.writerow(csv_row(rec))

    if spec.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(spec.threads) as pool:
            for batch in pool.map(lambda j: _run_instance(*j, spec), jobs):
                emit(batch)
    else:
        for job in jobs:
            emit(_run_instance(*job, spec))
    return records


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def csv_row(rec: BenchRecord) -> list:
    d = asdict(rec)
    return [_fmt(d[c]) for c in CSV_COLUMNS]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(csv_row(rec))
    return buf.getvalue()


def read_csv(text: str) -> list:
    """Parse a bench CSV back into records (error messages are not stored in the CSV)."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        kw = {}
        for col in CSV_COLUMNS:
            raw = row[col]
            if col in ("instance", "algorithm"):
                kw[col] = raw
            elif raw == "":
                kw[col] = None
            elif col in ("n", "seed"):
                kw[col] = int(raw)
            else:
                kw[col] = float(raw)
        if kw["value"] is None:
            kw["error"] = "error"
        out.append(BenchRecord(**kw))
    return out


@dataclass
class SummaryRow:
    instance: str
    algorithm: str
    count: int
    gap_pct: Optional[float]
    vs_opt_pct: Optional[float]
    time_ms: Optional[float]


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def summarize(records) -> list:
    """Average each (instance class, algorithm) over its seeds.

    ``vs_opt_pct`` compares a heuristic with the exact optimum of the same
    seed: the LP optimum for matchings, twice it for tours.
    """
    groups: dict = {}
    opt: dict = {}
    for r in records:
        if not r.ok:
            continue
        groups.setdefault((r.instance, r.algorithm), []).append(r)
        if r.algorithm == "lp_opt":
            opt[(r.instance, r.seed)] = r.value
    rows = []
    for (inst, algo), recs in groups.items():
        vs = []
        for r in recs:
            o = opt.get((inst, r.seed))
            if o is None or algo in ("lp_opt", "brute"):
                continue
            ref = 2 * o if algo in TOUR_ALGOS else o
            vs.append(100.0 * (ref - r.value) / r.value)
        rows.append(SummaryRow(inst, algo, len(recs), _mean(r.gap_pct for r in recs),
                               _mean(vs), _mean(r.time_ms for r in recs)))
    return rows


def format_summary(rows) -> str:
    def pct(v):
        return "-" if v is None else f"{v:.2f}%"

    lines = [f"{'instance':>14} {'algorithm':>14} {'reps':>5} {'vs bound':>9} "
             f"{'vs opt':>8} {'time':>10}"]
    for r in rows:
        t = "-" if r.time_ms is None else f"{r.time_ms / 1000:.2f} s"
        lines.append(f"{r.instance:>14} {r.algorithm:>14} {r.count:>5} {pct(r.gap_pct):>9} "
                     f"{pct(r.vs_opt_pct):>8} {t:>10}")
    return "\n".join(lines)
