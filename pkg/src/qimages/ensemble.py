"""Seed-reproducible ensembles of collapse walks and their statistics.

Run ``k`` of an ensemble draws from its own generator, derived from
``(master_seed, k)`` through :class:`numpy.random.SeedSequence`, so tallies do
not depend on how runs are scheduled across workers.  The first draw of each
run decides detection (registered with probability ``efficiency``); the rest
of the stream drives discretization and the walk.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import gammaincc

from . import __version__
from ._validation import check_int
from .collapse_walk import Rounding, SimplexPoint, WalkConfig, discretize, walk
from .exceptions import (
    DegenerateEnsembleError,
    ExportError,
    InsufficientSampleError,
    ShapeError,
    ValidationError,
)

THREADS_ENV = "COLLAPSE_WALK_THREADS"
_MIN_CHUNK = 64


@dataclass(frozen=True)
class EnsembleConfig:
    runs: int
    master_seed: int
    walk: WalkConfig = field(default_factory=WalkConfig)
    efficiency: float = 1.0
    workers: int | None = None

    def __post_init__(self):
        check_int(self.runs, "runs", minimum=1)
        check_int(self.master_seed, "master_seed", minimum=0)
        if self.master_seed >= 2**64:
            raise ValidationError("master_seed must fit in 64 bits")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValidationError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if self.workers is not None:
            check_int(self.workers, "workers", minimum=1)


class ChiSquareResult(NamedTuple):
    statistic: float
    dof: int
    p_value: float


@dataclass(eq=False)
class EnsembleStats:
    p: np.ndarray
    counts: np.ndarray
    runs: int
    registered: int
    mean_steps: float
    step_histogram: dict
    chi_square: ChiSquareResult | None
    manifest: dict

    @property
    def frequencies(self) -> np.ndarray:
        if self.registered == 0:
            return np.zeros(len(self.counts))
        return self.counts / self.registered

    @property
    def expected(self) -> np.ndarray:
        return self.registered * np.asarray(self.p)

    def to_dict(self) -> dict:
        chi = None
        if self.chi_square is not None:
            chi = {
                "statistic": float(self.chi_square.statistic),
                "dof": int(self.chi_square.dof),
                "p_value": float(self.chi_square.p_value),
            }
        return {
            "manifest": self.manifest,
            "counts": [int(c) for c in self.counts],
            "registered": int(self.registered),
            "runs": int(self.runs),
            "frequencies": [float(f) for f in self.frequencies],
            "expected": [float(e) for e in self.expected],
            "mean_steps": float(self.mean_steps),
            "step_histogram": self.step_histogram,
            "chi_square": chi,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleStats":
        chi = data.get("chi_square")
        return cls(
            p=np.array(data["manifest"]["p"], dtype=np.float64),
            counts=np.array(data["counts"], dtype=np.int64),
            runs=int(data["runs"]),
            registered=int(data["registered"]),
            mean_steps=float(data["mean_steps"]),
            step_histogram={k: list(v) for k, v in data["step_histogram"].items()},
            chi_square=None if chi is None else ChiSquareResult(
                chi["statistic"], chi["dof"], chi["p_value"]
            ),
            manifest=dict(data["manifest"]),
        )

    def __eq__(self, other):
        return isinstance(other, EnsembleStats) and self.to_dict() == other.to_dict()


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for one run of an ensemble."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.PCG64(ss))


def _simulate(coords, walk_cfg: WalkConfig, efficiency: float, master_seed: int, start: int, stop: int):
    p = SimplexPoint(coords)
    vertex = np.full(stop - start, -1, dtype=np.int64)
    steps = np.zeros(stop - start, dtype=np.int64)
    for n, k in enumerate(range(start, stop)):
        rng = run_rng(master_seed, k)
        if rng.random() >= efficiency:
            continue
        out = walk(discretize(p, walk_cfg, rng), rng, walk_cfg.max_steps)
        vertex[n], steps[n] = out.vertex, out.steps
    return vertex, steps


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: the request, capped by ``$COLLAPSE_WALK_THREADS`` when set.

    Without a request the environment value (or 1) is used.
    """
    raw = os.environ.get(THREADS_ENV)
    cap = None
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested is None:
        return cap or 1
    return min(requested, cap) if cap else requested


def _step_histogram(steps: np.ndarray) -> dict:
    """Power-of-two buckets: [0, 1), [1, 2), [2, 4), [4, 8), ..."""
    if steps.size == 0:
        return {"edges": [0, 1], "counts": [0]}
    buckets = np.array([int(s).bit_length() for s in steps], dtype=np.int64)
    nb = int(buckets.max()) + 1
    edges = [0] + [1 << k for k in range(nb)]
    return {"edges": edges, "counts": np.bincount(buckets, minlength=nb).tolist()}


def run_ensemble(p, config: EnsembleConfig) -> EnsembleStats:
    """Run ``config.runs`` independent collapses from ``p`` and tally the vertices reached."""
    if not isinstance(p, SimplexPoint):
        p = SimplexPoint(p)
    workers = resolve_workers(config.workers)
    chunk = max(_MIN_CHUNK, -(-config.runs // (4 * workers)))
    bounds = [(a, min(a + chunk, config.runs)) for a in range(0, config.runs, chunk)]
    args = (p.coords, config.walk, config.efficiency, config.master_seed)
    if workers == 1 or len(bounds) == 1:
        parts = [_simulate(*args, a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate, *args, a, b) for a, b in bounds]
            parts = [f.result() for f in futures]
    vertex = np.concatenate([v for v, _ in parts])
    steps = np.concatenate([s for _, s in parts])

    kept = vertex >= 0
    registered = int(kept.sum())
    if registered == 0:
        raise DegenerateEnsembleError(
            f"no run registered out of {config.runs} at efficiency {config.efficiency}"
        )
    counts = np.bincount(vertex[kept], minlength=p.d).astype(np.int64)
    stats = EnsembleStats(
        p=np.array(p.coords),
        counts=counts,
        runs=config.runs,
        registered=registered,
        mean_steps=float(steps[kept].mean()),
        step_histogram=_step_histogram(steps[kept]),
        chi_square=None,
        manifest=manifest(p, config),
    )
    try:
        stats.chi_square = chi_square_gof(stats, p)
    except InsufficientSampleError:
        pass
    return stats


def manifest(p: SimplexPoint, config: EnsembleConfig) -> dict:
    return {
        "p": [float(x) for x in p.coords],
        "runs": config.runs,
        "master_seed": config.master_seed,
        "M": config.walk.M,
        "efficiency": config.efficiency,
        "rounding": config.walk.rounding.value,
        "max_steps": config.walk.max_steps,
        "version": __version__,
    }


def config_from_manifest(man: dict) -> tuple[SimplexPoint, EnsembleConfig]:
    walk_cfg = WalkConfig(
        M=int(man["M"]),
        max_steps=man.get("max_steps"),
        rounding=Rounding(man.get("rounding", Rounding.LARGEST_REMAINDER.value)),
    )
    cfg = EnsembleConfig(
        runs=int(man["runs"]),
        master_seed=int(man["master_seed"]),
        walk=walk_cfg,
        efficiency=float(man.get("efficiency", 1.0)),
    )
    return SimplexPoint(man["p"]), cfg


def replay(man: dict, workers: int | None = None) -> EnsembleStats:
    """Rerun the ensemble described by a manifest."""
    p, cfg = config_from_manifest(man)
    if workers is not None:
        cfg = EnsembleConfig(cfg.runs, cfg.master_seed, cfg.walk, cfg.efficiency, workers)
    return run_ensemble(p, cfg)


def chi_square_gof(stats: EnsembleStats, p) -> ChiSquareResult:
    """Pearson goodness of fit of the vertex tallies against ``p``.

    ``p_value`` is the regularized upper incomplete gamma function
    ``Q(dof/2, statistic/2)``.
    """
    coords = p.coords if isinstance(p, SimplexPoint) else SimplexPoint(p).coords
    obs = np.asarray(stats.counts, dtype=np.float64)
    if obs.size != coords.size:
        raise ShapeError(f"{obs.size} tallies for a {coords.size}-outcome distribution")
    if stats.registered <= 0:
        raise InsufficientSampleError("no registered runs")
    exp = stats.registered * coords
    if np.any(exp < 5):
        raise InsufficientSampleError(
            f"expected counts {exp.tolist()} fall below 5; chi-square is unreliable"
        )
    statistic = float(np.sum((obs - exp) ** 2 / exp))
    dof = coords.size - 1
    return ChiSquareResult(statistic, dof, float(gammaincc(dof / 2.0, statistic / 2.0)))


def _manifest_path(path: Path) -> Path:
    return path.with_name(path.stem + ".manifest.json")


def export(stats: EnsembleStats, path, fmt: str | None = None) -> Path:
    """Write ``stats`` as JSON (manifest embedded) or CSV (manifest beside it).

    CSV columns are ``vertex,count,frequency,expected``; the manifest goes to
    ``<stem>.manifest.json`` next to the CSV file.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "json").lower()
    if fmt not in ("json", "csv"):
        raise ValidationError(f"unsupported export format {fmt!r}")
    try:
        if fmt == "json":
            path.write_text(json.dumps(stats.to_dict(), indent=2) + "\n")
        else:
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["vertex", "count", "frequency", "expected"])
                for k, (c, f, e) in enumerate(zip(stats.counts, stats.frequencies, stats.expected)):
                    writer.writerow([k, int(c), repr(float(f)), repr(float(e))])
            _manifest_path(path).write_text(json.dumps(stats.manifest, indent=2) + "\n")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def load(path) -> EnsembleStats:
    path = Path(path)
    try:
        return EnsembleStats.from_dict(json.loads(path.read_text()))
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
