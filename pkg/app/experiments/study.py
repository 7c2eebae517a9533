"""
Convergence and timing studies on the two-out random model.

Rows are produced per (n, sample) with instance seeds derived from the study
seed, so a study is reproducible and independent of the number of workers.
"""

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.core.exceptions import DmdpError, SolverDisagreementError
from app.core.logging_config import setup_logging
from app.core.settings import settings
from app.dmdp.generators import gen_two_out_random
from app.dmdp.graph import Graph
from app.dmdp.scalar import FLOAT_MODE, field_for_mode
from app.experiments.detection import find_in_history, find_in_policy
from app.solvers.baselines import bf_positive_cycle
from app.solvers.history_walk import run_history_walk
from app.solvers.value_iteration import detect_policy_cycles, optimal_cycle_formed, run_vi

# Set up logging
logger = setup_logging(__name__)

FIND_IN_POLICY = "find-in-policy"
FIND_IN_HISTORY = "find-in-history"
HISTORY = "history"
STUDY_SOLVERS = (FIND_IN_POLICY, FIND_IN_HISTORY, HISTORY)


class ExperimentRow(BaseModel):
    n: int = Field(..., description="Vertex count")
    seed: int = Field(..., description="Instance seed")
    mu_star: str = Field(..., description="Verified optimal mean")
    cycle_length: int = Field(..., description="Length of the first optimal policy cycle")
    first_formation: int = Field(..., ge=1, description="First iteration with an optimal policy cycle")
    detect_iterations: int = Field(..., description="Iterations the solver needed")
    wall_time_ns: int = Field(..., description="Solver wall time")
    algorithm: str = Field(..., description="Solver that produced mu_star")


class SizeSummary(BaseModel):
    n: int
    samples: int
    mean_cycle_length: float
    std_cycle_length: float
    mean_first_formation: float
    std_first_formation: float
    mean_detect_iterations: float


class TimingRow(BaseModel):
    n: int
    algorithm: str
    instances: int
    median_ns: float


def instance_seed(seed: int, n: int, sample: int) -> int:
    """Seed of one study instance; independent of evaluation order."""
    return int(np.random.SeedSequence([seed, n, sample]).generate_state(1)[0])


def _solve(graph: Graph, solver: str) -> Tuple[object, int]:
    if solver == FIND_IN_POLICY:
        result = find_in_policy(graph)
        return result.mean, result.iterations
    if solver == FIND_IN_HISTORY:
        result = find_in_history(graph)
        return result.mean, result.iterations
    if solver == HISTORY:
        result = run_history_walk(graph)
        if bf_positive_cycle(graph, result.mean):
            logger.error(f"History walk mean {result.mean} failed verification")
            raise SolverDisagreementError(f"History-walk mean {result.mean} is below the optimum")
        return result.mean, result.iterations
    raise DmdpError(f"Unknown study solver '{solver}' (expected one of {', '.join(STUDY_SOLVERS)})")


def _study_instance(task: Tuple[int, int, int, str, str]) -> ExperimentRow:
    n, sample, seed, mode, solver = task
    field = field_for_mode(mode)
    graph_seed = instance_seed(seed, n, sample)
    graph = gen_two_out_random(n, graph_seed, field)

    started = time.perf_counter_ns()
    mu, iterations = _solve(graph, solver)
    elapsed = time.perf_counter_ns() - started

    trace = run_vi(graph, max_t=4 * n * n + 1, stop=optimal_cycle_formed(mu), reference_mean=mu)
    if trace.first_formation is None:
        raise DmdpError(f"No optimal cycle formed for n={n}, seed={graph_seed}")
    formed = [c for c in detect_policy_cycles(graph, trace.final_state.chosen) if field.eq(c.mean, mu)]
    return ExperimentRow(
        n=n,
        seed=graph_seed,
        mu_star=field.format(mu),
        cycle_length=formed[0].length,
        first_formation=trace.first_formation,
        detect_iterations=iterations,
        wall_time_ns=elapsed,
        algorithm=solver,
    )


def run_convergence_study(
    sizes: Sequence[int],
    samples: int,
    seed: int,
    mode: str = FLOAT_MODE,
    solver: str = FIND_IN_POLICY,
    workers: int = 1
) -> List[ExperimentRow]:
    """
    Optimal-cycle length and first-formation iteration over random instances.

    Args:
        sizes: Vertex counts, ascending
        samples: Instances per size
        seed: Study seed
        mode: Reward arithmetic ("exact" or "float")
        solver: How mu* is obtained: "find-in-policy", "find-in-history" or
            "history" (every answer is verified by Bellman-Ford)
        workers: Process-pool size; 1 evaluates in-process

    Returns:
        One row per instance, ordered by (n, sample)
    """
    if list(sizes) != sorted(sizes):
        raise DmdpError(f"Study sizes must be ascending, got {list(sizes)}")
    if samples < 1:
        raise DmdpError(f"samples must be at least 1, got {samples}")
    tasks = [(n, i, seed, mode, solver) for n in sizes for i in range(samples)]
    logger.info(f"Convergence study: {len(tasks)} instances, sizes {list(sizes)}, {workers} worker(s)")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps submission order
            return list(pool.map(_study_instance, tasks))
    return [_study_instance(task) for task in tasks]


def summarize_study(rows: Iterable[ExperimentRow]) -> List[SizeSummary]:
    """Per-size mean and standard deviation of cycle length and first formation."""
    by_size = {}
    for row in rows:
        by_size.setdefault(row.n, []).append(row)
    summaries = []
    for n in sorted(by_size):
        group = by_size[n]
        lengths = np.array([r.cycle_length for r in group], dtype=float)
        formations = np.array([r.first_formation for r in group], dtype=float)
        detections = np.array([r.detect_iterations for r in group], dtype=float)
        summaries.append(SizeSummary(
            n=n,
            samples=len(group),
            mean_cycle_length=float(lengths.mean()),
            std_cycle_length=float(lengths.std()),
            mean_first_formation=float(formations.mean()),
            std_first_formation=float(formations.std()),
            mean_detect_iterations=float(detections.mean()),
        ))
    return summaries


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Exponent b of the least-squares fit y = a * x^b in log-log space."""
    if len(xs) < 2:
        raise DmdpError("A power-law fit needs at least two points")
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


def write_study_csv(rows: Iterable[ExperimentRow], handle: TextIO) -> None:
    """Write rows with a versioned schema comment as the first line."""
    handle.write(f"# dmdp-experiment schema v{settings.CSV_SCHEMA_VERSION}\n")
    writer = csv.DictWriter(handle, fieldnames=list(ExperimentRow.model_fields), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump())


def run_timing_study(
    sizes: Sequence[int],
    instances: int,
    seed: int,
    algorithms: Sequence[str] = (FIND_IN_POLICY, FIND_IN_HISTORY),
    repetitions: Optional[int] = None
) -> List[TimingRow]:
    """
    Median wall time of the detectors in float mode.

    Every instance is timed ``repetitions`` times (default:
    settings.TIMING_REPETITIONS) and its median taken; the row reports the mean
    of the per-instance medians. Runs are sequential.
    """
    repetitions = repetitions or settings.TIMING_REPETITIONS
    field = field_for_mode(FLOAT_MODE)
    rows = []
    for n in sizes:
        graphs = [gen_two_out_random(n, instance_seed(seed, n, i), field) for i in range(instances)]
        for algorithm in algorithms:
            medians = []
            for graph in graphs:
                samples = []
                for _ in range(repetitions):
                    started = time.perf_counter_ns()
                    _solve(graph, algorithm)
                    samples.append(time.perf_counter_ns() - started)
                medians.append(float(np.median(samples)))
            rows.append(TimingRow(n=n, algorithm=algorithm, instances=instances, median_ns=float(np.mean(medians))))
            logger.info(f"Timing n={n} {algorithm}: {rows[-1].median_ns / 1e6:.2f} ms")
    return rows
