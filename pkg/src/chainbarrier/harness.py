"""Reproducible experiment batches: paired-seed trials, CSV output.

Every trial derives its seed from (seed_base, n, trial) with a stable hash,
so all algorithms in a batch see the identical deployment and a rerun of the
same spec is bit-identical (modulo measured wall time, which can be turned
off for byte-stable output).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable

from .barrier import run as run_formation
from .baseline import plan_linear_barrier
from .errors import ChainBarrierError, ParameterError
from .model import (
    AlgoConfig,
    BeltRegion,
    Deployment,
    deployment_to_json,
    uniform_random_deployment,
)

ALGORITHMS = ("linear_baseline", "nonlinear")
CSV_HEADER = "algorithm,n,seed,avg_disp,max_disp,iterations,covered,wall_time_s"
CSV_HEADER_VERBOSE = CSV_HEADER + ",deployment_sha,error"


@dataclass(frozen=True)
class ExperimentSpec:
    belt: BeltRegion
    rs: float
    n_values: tuple[int, ...]
    trials: int
    seed_base: int
    algorithms: tuple[str, ...] = ALGORITHMS
    objective: str = "min_avg"
    frame_every: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if not self.n_values:
            raise ParameterError("n_values must be non-empty")
        if not self.algorithms:
            raise ParameterError("algorithms must be a non-empty subset of " + str(ALGORITHMS))
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ParameterError(f"unknown algorithms {sorted(unknown)}")
        if self.objective not in ("min_avg", "min_max"):
            raise ParameterError(f"unknown objective {self.objective!r}")
        minimum = math.ceil(self.belt.length / (2.0 * self.rs))
        low = [n for n in self.n_values if n < minimum]
        if low:
            raise ParameterError(f"n values {low} below the spanning minimum {minimum}")
        object.__setattr__(self, "n_values", tuple(self.n_values))
        object.__setattr__(self, "algorithms", tuple(sorted(set(self.algorithms))))

    def to_json(self) -> str:
        doc = {
            "belt": {"length": self.belt.length, "width": self.belt.width},
            "rs": self.rs,
            "n_values": list(self.n_values),
            "trials": self.trials,
            "seed_base": self.seed_base,
            "algorithms": list(self.algorithms),
            "objective": self.objective,
            "frame_every": self.frame_every,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        try:
            doc = json.loads(text)
            return cls(
                belt=BeltRegion(float(doc["belt"]["length"]), float(doc["belt"]["width"])),
                rs=float(doc["rs"]),
                n_values=tuple(int(n) for n in doc["n_values"]),
                trials=int(doc["trials"]),
                seed_base=int(doc["seed_base"]),
                algorithms=tuple(doc.get("algorithms", ALGORITHMS)),
                objective=doc.get("objective", "min_avg"),
                frame_every=doc.get("frame_every"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"malformed experiment spec: {exc}") from exc


def default_spec(trials: int = 30, seed_base: int = 20240501) -> ExperimentSpec:
    """Desk-scale default: 50m x 8m belt, Rs 0.5m, N swept 55..80."""
    return ExperimentSpec(
        belt=BeltRegion(50.0, 8.0),
        rs=0.5,
        n_values=(55, 60, 65, 70, 75, 80),
        trials=trials,
        seed_base=seed_base,
    )


@dataclass(frozen=True)
class ExperimentRow:
    algorithm: str
    n: int
    seed: int
    avg_disp: float
    max_disp: float
    iterations: int
    covered: bool
    wall_time_s: float
    deployment_sha: str = ""
    error: str = ""


@dataclass(frozen=True)
class AggregateStat:
    mean_avg: float
    mean_max: float
    successes: int
    failures: int


def trial_seed(seed_base: int, n: int, trial: int) -> int:
    """Stable per-trial seed; both algorithms of a trial share it."""
    digest = hashlib.blake2b(f"{n}:{trial}".encode(), digest_size=8).digest()
    return (seed_base ^ int.from_bytes(digest, "big")) & (2**63 - 1)


def _deployment_sha(dep: Deployment) -> str:
    return hashlib.sha256(deployment_to_json(dep).encode()).hexdigest()[:12]


def run_experiment(
    spec: ExperimentSpec,
    *,
    config_overrides: dict | None = None,
    measure_time: bool = True,
    progress: Callable[[ExperimentRow], None] | None = None,
) -> list[ExperimentRow]:
    """Run every (algorithm, n, trial) cell; failures become tagged rows.

    Rows come back in deterministic (algorithm, n, trial) order, and trial
    (n, t) uses one shared deployment for every algorithm.
    """
    overrides = config_overrides or {}
    rows: list[ExperimentRow] = []
    for algorithm in spec.algorithms:
        for n in spec.n_values:
            for t in range(spec.trials):
                seed = trial_seed(spec.seed_base, n, t)
                dep = uniform_random_deployment(seed, n, spec.belt, spec.rs)
                started = time.perf_counter()
                error = ""
                avg = mx = float("nan")
                iterations = 0
                covered = False
                try:
                    if algorithm == "nonlinear":
                        cfg = AlgoConfig.defaults(spec.rs, rng_seed=seed, **overrides)
                        if spec.frame_every is not None:
                            cfg = replace(cfg, frame_every=spec.frame_every)
                        result = run_formation(dep, cfg)
                    else:
                        _, result = plan_linear_barrier(dep, spec.objective)
                    avg = result.avg_displacement
                    mx = result.max_displacement
                    iterations = result.iterations_used
                    covered = result.barrier_formed
                except ChainBarrierError as exc:
                    error = type(exc).__name__
                wall = time.perf_counter() - started if measure_time else 0.0
                row = ExperimentRow(
                    algorithm=algorithm,
                    n=n,
                    seed=seed,
                    avg_disp=avg,
                    max_disp=mx,
                    iterations=iterations,
                    covered=covered,
                    wall_time_s=wall,
                    deployment_sha=_deployment_sha(dep),
                    error=error,
                )
                rows.append(row)
                if progress is not None:
                    progress(row)
    return rows


def aggregate_summary(rows: Iterable[ExperimentRow]) -> dict[tuple[str, int], AggregateStat]:
    """Per (algorithm, n): mean of avg and of max displacement, successes only."""
    buckets: dict[tuple[str, int], list[ExperimentRow]] = {}
    for row in rows:
        buckets.setdefault((row.algorithm, row.n), []).append(row)
    out = {}
    for key in sorted(buckets):
        good = [r for r in buckets[key] if not r.error and r.covered]
        bad = len(buckets[key]) - len(good)
        if good:
            out[key] = AggregateStat(
                mean_avg=sum(r.avg_disp for r in good) / len(good),
                mean_max=sum(r.max_disp for r in good) / len(good),
                successes=len(good),
                failures=bad,
            )
        else:
            out[key] = AggregateStat(float("nan"), float("nan"), 0, bad)
    return out


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def rows_to_csv(rows: Iterable[ExperimentRow], verbose: bool = False) -> str:
    lines = [CSV_HEADER_VERBOSE if verbose else CSV_HEADER]
    for r in rows:
        base = (
            f"{r.algorithm},{r.n},{r.seed},{_fmt(r.avg_disp)},{_fmt(r.max_disp)},"
            f"{r.iterations},{'true' if r.covered else 'false'},{_fmt(r.wall_time_s)}"
        )
        if verbose:
            base += f",{r.deployment_sha},{r.error}"
        lines.append(base)
    return "\n".join(lines) + "\n"


def write_rows_csv(rows: Iterable[ExperimentRow], path: str | Path, verbose: bool = False) -> None:
    Path(path).write_text(rows_to_csv(rows, verbose=verbose))


def read_rows_csv(path: str | Path) -> list[ExperimentRow]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] not in (CSV_HEADER, CSV_HEADER_VERBOSE):
        raise ParameterError("unrecognized results CSV header")
    verbose = lines[0] == CSV_HEADER_VERBOSE
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            ExperimentRow(
                algorithm=parts[0],
                n=int(parts[1]),
                seed=int(parts[2]),
                avg_disp=float(parts[3]),
                max_disp=float(parts[4]),
                iterations=int(parts[5]),
                covered=parts[6] == "true",
                wall_time_s=float(parts[7]),
                deployment_sha=parts[8] if verbose else "",
                error=parts[9] if verbose else "",
            )
        )
    return rows
