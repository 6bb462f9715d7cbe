"""Failed searches under crashes, with and without redundant successors.

Routes real paths over the damaged graph (no repair), so the failure
fraction can exceed what connectivity alone implies: a pair can stay
connected while greedy routing still dead-ends on missing links.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from ..core.records import GraphSnapshot
from ..router import route_search
from ..seeding import derive_seed
from ..world import oracle_snapshot
from .common import crash_sample


@dataclass(frozen=True)
class SearchFailureResult:
    n: int
    p_f: float
    k: int
    seed: int
    searches: int
    failed: int
    failed_k0: int

    @property
    def frac_failed(self) -> float:
        return self.failed / self.searches if self.searches else 0.0

    @property
    def frac_failed_k0(self) -> float:
        return self.failed_k0 / self.searches if self.searches else 0.0

    def csv_row(self) -> str:
        return (
            f"{self.n},{self.p_f:.6f},{self.k},{self.seed},{self.searches},"
            f"{self.frac_failed:.6f},{self.frac_failed_k0:.6f}"
        )


CSV_HEADER = "n,p_f,k,seed,searches,frac_failed,frac_failed_k0"


def run_search_failure_experiment(
    n: int,
    p_f_grid: Sequence[float],
    redundancy: int,
    num_searches: int,
    *,
    seed: int = 0,
    alphabet_size: int = 2,
) -> list[SearchFailureResult]:
    snap = oracle_snapshot(n, seed=seed, alphabet_size=alphabet_size, redundancy=redundancy)
    all_ids = sorted(snap.nodes)
    results = []
    for p_f in p_f_grid:
        crashed = crash_sample(all_ids, p_f, seed, tag="failures")
        view = GraphSnapshot()
        view.nodes = snap.nodes
        view.alive = set(all_ids) - crashed
        alive = sorted(view.alive)
        if len(alive) < 2:
            results.append(SearchFailureResult(n, p_f, redundancy, seed, 0, 0, 0))
            continue
        rng = random.Random(derive_seed(seed, "search-pairs", f"{p_f:.6f}"))
        failed = 0
        failed_k0 = 0
        for _ in range(num_searches):
            src = alive[rng.randrange(len(alive))]
            dst = alive[rng.randrange(len(alive))]
            while dst == src:
                dst = alive[rng.randrange(len(alive))]
            target = snap.nodes[dst].key
            if route_search(view, src, target, redundancy=redundancy).outcome != "found":
                failed += 1
            if redundancy > 0:
                if route_search(view, src, target, redundancy=0).outcome != "found":
                    failed_k0 += 1
        if redundancy == 0:
            failed_k0 = failed
        results.append(
            SearchFailureResult(n, p_f, redundancy, seed, num_searches, failed, failed_k0)
        )
    return results
