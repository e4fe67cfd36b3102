"""Exact reference solver.

Enumerates orchestrator subsets in increasing cardinality and, for each,
every capacity- and delay-respecting assignment of PoPs to heads; feasible
plans then get their domains solved exactly by the manager placer. Because
subsets are visited smallest-first and any plan with k orchestrators costs
at least k plus a floor on the managers, the search can stop early with a
proved optimum. On ties the first solution in enumeration order (increasing
cardinality, then lexicographic subsets and assignments) is kept, which
makes results reproducible.

Intended for desk-scale instances (around six PoPs or fewer); the node and
time budget turns runaway searches into a reported ``BUDGET_EXCEEDED``
instead of a hang. ``INFEASIBLE`` is only ever reported after the whole
space has been enumerated.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterator

from .model import DomainPlan, Solution, VnfmAssignment
from .topology import ProblemInstance
from .vnfm import domains_of, place_domain


class OracleStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 1_000_000
    time_limit_s: float = 60.0

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        if self.time_limit_s <= 0:
            raise ValueError("time_limit_s must be > 0")


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    solution: Solution | None
    objective: int | None
    nodes_explored: int


class _BudgetHit(Exception):
    pass


class _Ticker:
    def __init__(self, budget: OracleBudget):
        self.nodes = 0
        self.max_nodes = budget.max_nodes
        self.deadline = time.monotonic() + budget.time_limit_s

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes or time.monotonic() > self.deadline:
            raise _BudgetHit


def _groups_reachable(instance: ProblemInstance, head_of) -> bool:
    """Every VNF's domain must offer a PoP within both manager bounds."""
    d = instance.delays.values
    n = instance.pop_count
    for loc, w, big_w, _cnt in instance.vnf_groups:
        head = head_of[loc]
        drow = d[loc]
        if not any(head_of[pp] == head and drow[pp] <= w and d[pp][head] <= big_w
                   for pp in range(n)):
            return False
    return True


def _feasible_assignments(instance: ProblemInstance, heads: tuple[int, ...],
                          tick=None) -> Iterator[tuple[int, ...]]:
    """Yield complete head assignments for this orchestrator subset, in
    lexicographic order, honouring the VIM delay bound and domain capacity."""
    n = instance.pop_count
    d = instance.delays.values
    big_psi = instance.params.nfvo_vim_delay_bound
    cap = instance.params.nfvo_capacity

    vnfs_at = [0] * n
    for loc in instance.vnf_locations:
        vnfs_at[loc] += 1

    head_set = set(heads)
    counts = {p: vnfs_at[p] for p in heads}
    if any(c > cap for c in counts.values()):
        return
    nonheads = [q for q in range(n) if q not in head_set]
    candidates: dict[int, list[int]] = {}
    for q in nonheads:
        cs = [p for p in heads if d[p][q] <= big_psi]
        if not cs:
            return
        candidates[q] = cs

    head_of = list(range(n))

    def rec(i: int) -> Iterator[tuple[int, ...]]:
        if i == len(nonheads):
            if tick is not None:
                tick()
            if _groups_reachable(instance, head_of):
                yield tuple(head_of)
            return
        q = nonheads[i]
        vq = vnfs_at[q]
        for p in candidates[q]:
            if counts[p] + vq > cap:
                continue
            counts[p] += vq
            head_of[q] = p
            yield from rec(i + 1)
            counts[p] -= vq

    yield from rec(0)


def _plan_of(instance: ProblemInstance, heads: tuple[int, ...],
             head_of: tuple[int, ...]) -> DomainPlan:
    nfvo_at = [False] * instance.pop_count
    for p in heads:
        nfvo_at[p] = True
    return DomainPlan(tuple(nfvo_at), head_of)


def _solve_domains(instance: ProblemInstance, plan: DomainPlan) -> tuple[VnfmAssignment, ...]:
    vnfms: list[VnfmAssignment] = []
    for domain in domains_of(instance, plan):
        # Always the exact per-domain solver here, whatever the domain size.
        vnfms.extend(place_domain(instance, domain,
                                  exact_threshold=max(1, len(domain.vnf_ids))))
    return tuple(vnfms)


def solve_exact(instance: ProblemInstance,
                budget: OracleBudget | None = None) -> OracleResult:
    """Provably optimal solution, within the given search budget."""
    budget = budget or OracleBudget()
    ticker = _Ticker(budget)
    params = instance.params
    d = instance.delays.values
    gso = params.gso_location
    n = instance.pop_count
    head_candidates = [p for p in range(n)
                       if d[gso][p] <= params.gso_nfvo_delay_bound]
    vnfm_floor = math.ceil(instance.vnf_count / params.vnfm_capacity)

    best_objective: int | None = None
    best_solution: Solution | None = None

    try:
        for k in range(1, n + 1):
            if best_objective is not None and k + vnfm_floor >= best_objective:
                break  # no larger subset can beat the incumbent: proved optimal
            for heads in combinations(head_candidates, k):
                ticker.tick()
                for head_of in _feasible_assignments(instance, heads, ticker.tick):
                    plan = _plan_of(instance, heads, head_of)
                    per_domain_floor = sum(
                        math.ceil(len(dom.vnf_ids) / params.vnfm_capacity)
                        for dom in domains_of(instance, plan))
                    if (best_objective is not None
                            and k + per_domain_floor >= best_objective):
                        continue
                    vnfms = _solve_domains(instance, plan)
                    total = k + len(vnfms)
                    if best_objective is None or total < best_objective:
                        best_objective = total
                        best_solution = Solution(plan, vnfms)
    except _BudgetHit:
        return OracleResult(OracleStatus.BUDGET_EXCEEDED, best_solution,
                            best_objective, ticker.nodes)

    if best_solution is None:
        return OracleResult(OracleStatus.INFEASIBLE, None, None, ticker.nodes)
    return OracleResult(OracleStatus.OPTIMAL, best_solution, best_objective,
                        ticker.nodes)


def min_feasible_nfvo_count(instance: ProblemInstance) -> int | None:
    """Smallest orchestrator count for which any feasible domain plan exists.

    This is the target of the search's first step (manager count played no
    part), which makes it the reference for judging the tabu result. None
    means no plan is feasible at any cardinality.
    """
    params = instance.params
    d = instance.delays.values
    n = instance.pop_count
    head_candidates = [p for p in range(n)
                       if d[params.gso_location][p] <= params.gso_nfvo_delay_bound]
    for k in range(1, n + 1):
        for heads in combinations(head_candidates, k):
            for _head_of in _feasible_assignments(instance, heads):
                return k
    return None
