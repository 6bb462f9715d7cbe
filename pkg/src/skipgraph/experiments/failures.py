"""Random-failure connectivity: who stays connected when nodes die."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from ..world import oracle_snapshot
from .common import component_stats, crash_sample


@dataclass(frozen=True)
class FailureExperimentResult:
    n: int
    p_f: float
    seed: int
    frac_isolated: float
    frac_primary: float
    survivors: int

    @property
    def degenerate(self) -> bool:
        return self.survivors == 0

    def csv_row(self) -> str:
        return f"{self.n},{self.p_f:.6f},{self.seed},{self.frac_isolated:.6f},{self.frac_primary:.6f}"


CSV_HEADER = "n,p_f,seed,frac_isolated,frac_primary"


def run_failure_experiment(
    n: int,
    p_f_grid: Sequence[float],
    seeds: Sequence[int],
    *,
    alphabet_size: int = 2,
    jobs: int = 1,
) -> list[FailureExperimentResult]:
    if n < 2:
        raise ValueError("need n >= 2")
    args = [(n, tuple(p_f_grid), seed, alphabet_size) for seed in seeds]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_seed = list(pool.map(_one_seed, args))
    else:
        per_seed = [_one_seed(a) for a in args]
    results = [r for rows in per_seed for r in rows]
    results.sort(key=lambda r: (r.p_f, r.seed))
    return results


def _one_seed(args: tuple[int, tuple[float, ...], int, int]) -> list[FailureExperimentResult]:
    n, p_f_grid, seed, alphabet_size = args
    snap = oracle_snapshot(n, seed=seed, alphabet_size=alphabet_size)
    all_ids = sorted(snap.nodes)
    out = []
    for p_f in p_f_grid:
        crashed = crash_sample(all_ids, p_f, seed, tag="failures")
        view = type(snap)()
        view.nodes = snap.nodes
        view.alive = set(all_ids) - crashed
        frac_isolated, frac_primary, survivors = component_stats(view)
        out.append(
            FailureExperimentResult(
                n=n,
                p_f=p_f,
                seed=seed,
                frac_isolated=frac_isolated,
                frac_primary=frac_primary,
                survivors=survivors,
            )
        )
    return out
