"""Tabu search for the orchestrator layer of the placement problem.

The search walks over domain plans, starting from one orchestrator at every
PoP, and minimises the number of orchestrators while driving a penalty to
zero. The penalty counts broken placement rules at unit weight: heads that
are not active orchestrators, activation/self-heading mismatches,
orchestrators out of the GSO's reach, PoPs out of their head's reach, and,
as a look-ahead for the manager step, VNFs whose domain offers no PoP
satisfying both manager delay bounds. Domains holding more VNFs than the
orchestrator capacity are penalised as well, because no later step can
repair an overfull domain.

Two move kinds are sampled uniformly: toggling a PoP's orchestrator
(deactivating one re-homes its member PoPs to their nearest surviving
orchestrator) and reassigning a single PoP to a different active
orchestrator. Moves whose attribute was used recently are tabu unless the
result would beat the best plan seen so far. Each iteration accepts the
best-scoring sampled neighbour if it improves on the best-found score and
otherwise the sampled neighbour with the fewest orchestrators, letting the
walk oscillate across the feasibility boundary instead of stalling. The
search stops after ``stop_patience`` consecutive iterations without
improving the best-found score.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import NoFeasiblePlan
from .model import DomainPlan
from .topology import ProblemInstance


@dataclass(frozen=True)
class TabuParams:
    """Search knobs; unset values resolve from the instance size.

    ``stop_patience`` defaults to 4x the PoP count, ``tabu_tenure`` to half
    the PoP count (rounded up) and ``neighborhood_samples`` to the PoP count
    but at least 10.
    """

    stop_patience: int | None = None
    tabu_tenure: int | None = None
    neighborhood_samples: int | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("stop_patience", "tabu_tenure", "neighborhood_samples"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1")

    def resolved(self, pop_count: int) -> tuple[int, int, int]:
        patience = self.stop_patience if self.stop_patience is not None else 4 * pop_count
        tenure = self.tabu_tenure if self.tabu_tenure is not None else math.ceil(pop_count / 2)
        samples = (self.neighborhood_samples if self.neighborhood_samples is not None
                   else max(10, pop_count))
        return patience, tenure, samples


@dataclass(frozen=True)
class Move:
    """A neighbourhood move; ``attribute`` is what the tabu list remembers."""

    kind: str  # "toggle" or "reassign"
    pop: int
    new_head: int | None = None

    def __post_init__(self):
        if self.kind not in ("toggle", "reassign"):
            raise ValueError(f"unknown move kind {self.kind!r}")
        if self.kind == "reassign" and self.new_head is None:
            raise ValueError("reassign moves need a new_head")
        if self.kind == "toggle" and self.new_head is not None:
            raise ValueError("toggle moves take no new_head")

    @property
    def attribute(self) -> tuple:
        if self.kind == "toggle":
            return ("toggle", self.pop)
        return ("reassign", self.pop, self.new_head)


@dataclass(frozen=True, order=True)
class Score:
    """Lexicographic search score: penalty first, then orchestrator count."""

    penalty: int
    nfvo_count: int


def initial_plan(instance: ProblemInstance) -> DomainPlan:
    """The all-on starting point: every PoP hosts an orchestrator and heads itself."""
    n = instance.pop_count
    return DomainPlan(tuple([True] * n), tuple(range(n)))


def _relaxed_penalty(instance: ProblemInstance, nfvo_at, head_of) -> int:
    d = instance.delays.values
    params = instance.params
    n = instance.pop_count
    pen = 0
    for q in range(n):
        if not nfvo_at[head_of[q]]:  # head is not an active orchestrator
            pen += 1
    for p in range(n):
        if (head_of[p] == p) != nfvo_at[p]:  # activation vs self-heading mismatch
            pen += 1
    gso_row = d[params.gso_location]
    psi = params.gso_nfvo_delay_bound
    for p in range(n):
        if nfvo_at[p] and gso_row[p] > psi:
            pen += 1
    big_psi = params.nfvo_vim_delay_bound
    for q in range(n):
        if d[head_of[q]][q] > big_psi:
            pen += 1
    # Look-ahead: a VNF whose domain has no PoP within both manager bounds
    # can never be given a manager later.
    for loc, w, big_w, cnt in instance.vnf_groups:
        head = head_of[loc]
        drow = d[loc]
        ok = False
        for pp in range(n):
            if head_of[pp] == head and drow[pp] <= w and d[pp][head] <= big_w:
                ok = True
                break
        if not ok:
            pen += cnt
    return pen


def _capacity_overload(instance: ProblemInstance, head_of) -> int:
    cap = instance.params.nfvo_capacity
    counts = [0] * instance.pop_count
    for loc in instance.vnf_locations:
        counts[head_of[loc]] += 1
    return sum(1 for c in counts if c > cap)


def penalty(instance: ProblemInstance, plan: DomainPlan) -> int:
    """Unit-weight count of broken relaxed rules (domain structure, GSO and
    VIM delay bounds, and the per-VNF manager-reachability look-ahead)."""
    return _relaxed_penalty(instance, plan.nfvo_at, plan.head_of)


def capacity_overload(instance: ProblemInstance, plan: DomainPlan) -> int:
    """Number of domains holding more VNFs than the orchestrator capacity."""
    return _capacity_overload(instance, plan.head_of)


def plan_score(instance: ProblemInstance, plan: DomainPlan) -> Score:
    """Search score: penalty (reachability rules plus overfull domains), then size."""
    pen = (_relaxed_penalty(instance, plan.nfvo_at, plan.head_of)
           + _capacity_overload(instance, plan.head_of))
    return Score(pen, plan.nfvo_count)


@dataclass
class TabuState:
    """Mutable search state shared between the loop and move proposal."""

    instance: ProblemInstance
    stop_patience: int
    tabu_tenure: int
    neighborhood_samples: int
    current_nfvo: list[bool] = field(default_factory=list)
    current_head: list[int] = field(default_factory=list)
    current_score: Score | None = None
    best_nfvo: tuple[bool, ...] = ()
    best_head: tuple[int, ...] = ()
    best_score: Score | None = None
    tabu: dict[tuple, int] = field(default_factory=dict)
    iteration: int = 0
    no_improvement: int = 0

    @classmethod
    def start(cls, instance: ProblemInstance, params: TabuParams) -> "TabuState":
        patience, tenure, samples = params.resolved(instance.pop_count)
        state = cls(instance, patience, tenure, samples)
        plan = initial_plan(instance)
        state.current_nfvo = list(plan.nfvo_at)
        state.current_head = list(plan.head_of)
        state.current_score = plan_score(instance, plan)
        state.best_nfvo = plan.nfvo_at
        state.best_head = plan.head_of
        state.best_score = state.current_score
        return state

    @property
    def current(self) -> DomainPlan:
        return DomainPlan(tuple(self.current_nfvo), tuple(self.current_head))

    @property
    def best_plan(self) -> DomainPlan:
        return DomainPlan(self.best_nfvo, self.best_head)

    @property
    def best_feasible_plan(self) -> DomainPlan | None:
        """Best plan seen with zero penalty; None while none has been reached."""
        if self.best_score is not None and self.best_score.penalty == 0:
            return self.best_plan
        return None

    def is_tabu(self, attribute: tuple) -> bool:
        return self.tabu.get(attribute, -1) >= self.iteration


@dataclass(frozen=True)
class _Candidate:
    move: Move
    nfvo_at: tuple[bool, ...]
    head_of: tuple[int, ...]
    score: Score


def _apply_toggle(instance: ProblemInstance, nfvo_at, head_of, pop):
    """Result of toggling ``pop``; None when it would remove the last orchestrator."""
    n = instance.pop_count
    d = instance.delays.values
    new_nfvo = list(nfvo_at)
    new_head = list(head_of)
    if nfvo_at[pop]:
        remaining = [c for c in range(n) if nfvo_at[c] and c != pop]
        if not remaining:
            return None
        new_nfvo[pop] = False
        for q in range(n):
            if head_of[q] == pop:
                # Re-home orphaned members to the nearest surviving
                # orchestrator (ties on the lowest PoP id).
                best = remaining[0]
                best_d = d[q][best]
                for c in remaining[1:]:
                    if d[q][c] < best_d:
                        best, best_d = c, d[q][c]
                new_head[q] = best
    else:
        new_nfvo[pop] = True
        new_head[pop] = pop
    return new_nfvo, new_head


def _propose_candidates(state: TabuState, rng: random.Random) -> list[_Candidate]:
    instance = state.instance
    n = instance.pop_count
    nfvo_at = state.current_nfvo
    head_of = state.current_head
    out: list[_Candidate] = []
    for _ in range(state.neighborhood_samples):
        if rng.random() < 0.5:
            pop = rng.randrange(n)
            move = Move("toggle", pop)
            applied = _apply_toggle(instance, nfvo_at, head_of, pop)
            if applied is None:
                continue
            new_nfvo, new_head = applied
        else:
            pop = rng.randrange(n)
            targets = [c for c in range(n) if nfvo_at[c] and c != head_of[pop]]
            if not targets:
                continue
            target = targets[rng.randrange(len(targets))]
            move = Move("reassign", pop, target)
            new_nfvo = list(nfvo_at)
            new_head = list(head_of)
            new_head[pop] = target
        pen = (_relaxed_penalty(instance, new_nfvo, new_head)
               + _capacity_overload(instance, new_head))
        cand = _Candidate(move, tuple(new_nfvo), tuple(new_head),
                          Score(pen, sum(new_nfvo)))
        if state.is_tabu(move.attribute) and not cand.score < state.best_score:
            continue  # tabu, and not good enough for aspiration
        out.append(cand)
    return out


def propose_moves(state: TabuState, rng: random.Random) -> list[tuple[Move, DomainPlan]]:
    """Sample the tabu-filtered neighbourhood of the current plan."""
    return [(c.move, DomainPlan(c.nfvo_at, c.head_of))
            for c in _propose_candidates(state, rng)]


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search run: best plan found plus iteration accounting."""

    best_plan: DomainPlan
    best_score: Score
    iterations: int
    last_improvement: int
    stop_patience: int

    @property
    def feasible(self) -> bool:
        return self.best_score.penalty == 0

    @property
    def plan(self) -> DomainPlan | None:
        return self.best_plan if self.feasible else None


def search(instance: ProblemInstance, params: TabuParams | None = None) -> SearchResult:
    """Run the tabu search to completion and report the best plan found."""
    params = params or TabuParams()
    rng = random.Random(params.seed)
    state = TabuState.start(instance, params)
    last_improvement = 0

    while state.no_improvement < state.stop_patience:
        state.iteration += 1
        candidates = _propose_candidates(state, rng)
        if not candidates:
            state.no_improvement += 1
            continue

        best_score = min(c.score for c in candidates)
        if best_score < state.best_score:
            tied = [c for c in candidates if c.score == best_score]
        else:
            # No sampled neighbour improves on the best found: take the one
            # with the fewest orchestrators, feasible or not, and keep moving.
            min_nfvo = min(c.score.nfvo_count for c in candidates)
            tied = [c for c in candidates if c.score.nfvo_count == min_nfvo]
        chosen = tied[rng.randrange(len(tied))]

        state.tabu[chosen.move.attribute] = state.iteration + state.tabu_tenure
        state.current_nfvo = list(chosen.nfvo_at)
        state.current_head = list(chosen.head_of)
        state.current_score = chosen.score

        if chosen.score < state.best_score:
            state.best_nfvo = chosen.nfvo_at
            state.best_head = chosen.head_of
            state.best_score = chosen.score
            state.no_improvement = 0
            last_improvement = state.iteration
        else:
            state.no_improvement += 1

    return SearchResult(state.best_plan, state.best_score, state.iteration,
                        last_improvement, state.stop_patience)


def place_nfvos(instance: ProblemInstance, params: TabuParams | None = None) -> DomainPlan:
    """Best zero-penalty plan found; raises :class:`NoFeasiblePlan` if none was."""
    result = search(instance, params)
    if result.plan is None:
        raise NoFeasiblePlan(result.best_score.penalty)
    return result.plan
