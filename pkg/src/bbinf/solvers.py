"""Solvers for joint slot/tag selection under cardinality budgets.

Four strategies over the same objective:

* ``exhaustive_search``    - exact maximiser over all (k-subset, l-subset)
  pairs, guarded by a combination cap.
* ``orthant_greedy``       - greedy one ground set at a time, run in both
  orders (slots then tags, tags then slots) and keeping the better result.
  ``mode="incremental"`` scans every remaining candidate each round;
  ``mode="lazy"`` keeps a priority queue of stale upper bounds and
  re-evaluates only until the top is fresh, which by diminishing returns
  picks the identical sequence with fewer evaluations.
* ``stochastic_greedy``    - same two-branch structure, but each round
  evaluates a fresh uniform sample of ceil((ground/budget) * ln(1/eps))
  unselected elements instead of all of them.

Greedy runs start from virtual default elements (see InfluenceInstance);
returned selections contain only real ids and the reported value is the
influence of the real ids alone. Tie-breaking is everywhere "strictly
greater wins, lowest id on equality", which makes all solvers deterministic
(given a seed, for the stochastic one).

``eval_count`` bookkeeping: each marginal-gain computation costs 2 units
(a gain is the difference of two influence values, one of them cached), and
each from-scratch influence evaluation costs 1.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .domain import (CapExceededError, InfeasibleBudgetError, InfluenceInstance,
                     Selection)
from .influence import SurvivalState, aggregated_influence, new_state

DEFAULT_CAP = 10_000_000

BRANCH_SLOTS_FIRST = "slots-first"
BRANCH_TAGS_FIRST = "tags-first"


@dataclass
class EvalCounter:
    """Influence-evaluation ledger in the 2-per-marginal-gain currency."""

    units: int = 0

    def gains(self, n: int = 1):
        self.units += 2 * n

    def full(self, n: int = 1):
        self.units += n


@dataclass(frozen=True)
class StochasticParams:
    """Sampling controls: epsilon in (0,1), seed, optional ground-set sizes.

    ``a`` and ``b`` override the slot/tag ground-set sizes used in the
    sample-size formula; they default to the instance's real slot and tag
    counts.
    """

    epsilon: float
    seed: int = 0
    a: int | None = None
    b: int | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solver run.

    ``pick_trace`` lists ("slot"|"tag", id, gain) in commit order for the
    winning branch (empty for exhaustive search and baselines). ``branch``
    names the greedy order that won, when applicable.
    """

    selection: Selection
    value: float
    eval_count: int
    wall_time_ms: int
    pick_trace: tuple[tuple[str, int, float], ...] = ()
    branch: str | None = None


def sample_size(ground: int, budget: int, epsilon: float) -> int:
    """Per-round stochastic sample size ceil((ground/budget) * ln(1/eps))."""
    return max(1, math.ceil((ground / budget) * math.log(1.0 / epsilon)))


class _SlotPhase:
    """Candidate-slot gain evaluation with the state's tag set frozen.

    ``inline_q=True`` computes each pair's effective probability on the fly
    instead of materialising it for every visible pair up front; the sampled
    greedy uses it so a run only pays for the pairs it actually inspects.
    Both paths produce bit-identical gains (same factor order and rounding).
    """

    kind = "slot"

    def __init__(self, state: SurvivalState, inline_q: bool = False):
        self.state = state
        inst = state.instance
        self._indptr = inst.vis_indptr
        self._users = inst.vis_users
        self._inline = inline_q
        if inline_q:
            self._P = inst.probs
            self._cols = np.asarray(state.tags, dtype=np.int64)
            self._q = None
        else:
            self._q = _kernels.pair_effective_probs(inst.probs, list(state.tags))

    def pool(self) -> list[int]:
        selected = set(self.state.slots)
        return [s for s in range(self.state.instance.n_slots) if s not in selected]

    def gains(self, ids: np.ndarray) -> np.ndarray:
        if self._inline:
            return _kernels.slot_gains_subset_cols(
                ids, self._indptr, self._users, self._P, self._cols,
                self.state.survival)
        return _kernels.slot_gains_subset(ids, self._indptr, self._users,
                                          self._q, self.state.survival)

    def commit(self, s: int, gain: float):
        lo, hi = int(self._indptr[s]), int(self._indptr[s + 1])
        if self._inline:
            _kernels.commit_slot_rows_cols(lo, hi, self._users, self._P,
                                           self._cols, self.state.survival)
        else:
            _kernels.commit_slot_rows(lo, hi, self._users, self._q,
                                      self.state.survival)
        self.state.slots.append(int(s))
        self.state.value += gain


class _TagPhase:
    """Candidate-tag gain evaluation with the state's slot set frozen."""

    kind = "tag"

    def __init__(self, state: SurvivalState):
        self.state = state
        inst = state.instance
        real = [s for s in state.slots if s != inst.default_slot_id]
        M = _kernels.user_tag_products(real, inst.probs, inst.n_users,
                                       inst.vis_indptr, inst.vis_users)
        if inst.default_slot_id in state.slots:
            M = M * (1.0 - inst.default_slot_probs)[None, :]
        self._M = M

    def pool(self) -> list[int]:
        selected = set(self.state.tags)
        return [c for c in range(self.state.instance.n_tags) if c not in selected]

    def gains(self, ids: np.ndarray) -> np.ndarray:
        surv = self.state.survival
        return np.array([_kernels.dot_complement(surv, self._M[:, c]) for c in ids],
                        dtype=np.float64)

    def commit(self, c: int, gain: float):
        surv = self.state.survival
        surv *= self._M[:, c]
        surv[surv < _kernels.SURVIVAL_FLOOR] = 0.0
        self.state.tags.append(int(c))
        self.state.value += gain


def _greedy_incremental(phase, pool, budget, counter, trace):
    remaining = sorted(pool)
    picks = []
    for _ in range(budget):
        cand = np.asarray(remaining, dtype=np.int64)
        gains = phase.gains(cand)
        counter.gains(len(cand))
        j = int(np.argmax(gains))  # first maximum: lowest id wins ties
        chosen, gain = remaining[j], float(gains[j])
        phase.commit(chosen, gain)
        trace.append((phase.kind, chosen, gain))
        picks.append(chosen)
        del remaining[j]
    return picks


def _greedy_lazy(phase, pool, budget, counter, trace):
    remaining = sorted(pool)
    cand = np.asarray(remaining, dtype=np.int64)
    gains = phase.gains(cand)
    counter.gains(len(cand))
    heap = [(-float(g), int(e), 0) for g, e in zip(gains, cand)]
    heapq.heapify(heap)
    picks = []
    for rnd in range(budget):
        while True:
            neg_gain, elem, stamp = heapq.heappop(heap)
            if stamp == rnd:
                break
            fresh = float(phase.gains(np.asarray([elem], dtype=np.int64))[0])
            counter.gains(1)
            heapq.heappush(heap, (-fresh, elem, rnd))
        gain = -neg_gain
        phase.commit(elem, gain)
        trace.append((phase.kind, elem, gain))
        picks.append(elem)
    return picks


def _greedy_stochastic(phase, pool, budget, per_round, rng, counter, trace):
    # the pool lives in one array with swap-to-end removal so each round costs
    # O(sample), not O(pool)
    pool_arr = np.array(sorted(pool), dtype=np.int64)
    size = len(pool_arr)
    picks = []
    for _ in range(budget):
        m = min(size, per_round)
        cand = rng.choice(pool_arr[:size], size=m, replace=False)
        cand.sort()
        gains = phase.gains(cand)
        counter.gains(m)
        j = int(np.argmax(gains))
        chosen, gain = int(cand[j]), float(gains[j])
        phase.commit(chosen, gain)
        trace.append((phase.kind, chosen, gain))
        picks.append(chosen)
        idx = int(np.nonzero(pool_arr[:size] == chosen)[0][0])
        size -= 1
        pool_arr[idx] = pool_arr[size]
    return picks


def _check_budgets(instance: InfluenceInstance, k: int, l: int):
    if not 1 <= k <= instance.n_slots:
        raise InfeasibleBudgetError(
            f"k={k} infeasible for {instance.n_slots} slots")
    if not 1 <= l <= instance.n_tags:
        raise InfeasibleBudgetError(
            f"l={l} infeasible for {instance.n_tags} tags")


def greedy_select_slots(state: SurvivalState, k: int, pool=None,
                        mode: str = "incremental", counter: EvalCounter | None = None,
                        trace: list | None = None) -> list[int]:
    """Commit ``k`` slots greedily by marginal gain; returns them in order.

    The state's tag set must stay fixed for the duration (it is: commits here
    only add slots). ``pool`` defaults to every unselected real slot.
    """
    counter = counter if counter is not None else EvalCounter()
    trace = trace if trace is not None else []
    phase = _SlotPhase(state)
    pool = phase.pool() if pool is None else sorted(set(int(s) for s in pool))
    selected = set(state.slots)
    if any(s in selected for s in pool):
        raise ValueError("pool contains already selected slots")
    if len(pool) < k:
        raise InfeasibleBudgetError(f"pool of {len(pool)} slots cannot fill k={k}")
    if mode == "incremental":
        return _greedy_incremental(phase, pool, k, counter, trace)
    if mode == "lazy":
        return _greedy_lazy(phase, pool, k, counter, trace)
    raise ValueError(f"unknown mode {mode!r}")


def greedy_select_tags(state: SurvivalState, l: int, pool=None,
                       mode: str = "incremental", counter: EvalCounter | None = None,
                       trace: list | None = None) -> list[int]:
    """Tag-side counterpart of :func:`greedy_select_slots`."""
    counter = counter if counter is not None else EvalCounter()
    trace = trace if trace is not None else []
    phase = _TagPhase(state)
    pool = phase.pool() if pool is None else sorted(set(int(c) for c in pool))
    selected = set(state.tags)
    if any(c in selected for c in pool):
        raise ValueError("pool contains already selected tags")
    if len(pool) < l:
        raise InfeasibleBudgetError(f"pool of {len(pool)} tags cannot fill l={l}")
    if mode == "incremental":
        return _greedy_incremental(phase, pool, l, counter, trace)
    if mode == "lazy":
        return _greedy_lazy(phase, pool, l, counter, trace)
    raise ValueError(f"unknown mode {mode!r}")


def _seed_state(instance: InfluenceInstance) -> SurvivalState:
    return new_state(instance,
                     slots=[instance.default_slot_id],
                     tags=[instance.default_tag_id])


def _run_branch(instance, branch, run_slot_loop, run_tag_loop):
    """One greedy order; returns (real selection, trace)."""
    state = _seed_state(instance)
    trace: list[tuple[str, int, float]] = []
    if branch == BRANCH_SLOTS_FIRST:
        slots = run_slot_loop(state, trace)
        tags = run_tag_loop(state, trace)
    else:
        tags = run_tag_loop(state, trace)
        slots = run_slot_loop(state, trace)
    return Selection(tuple(slots), tuple(tags)), trace


def _pick_winner(instance, branches):
    """Evaluate both branches without the virtual defaults; ties favour the
    slots-first order. These two evaluations stay outside eval_count, which
    tracks marginal-gain computations only."""
    values = {}
    for name, (sel, _) in branches.items():
        values[name] = aggregated_influence(instance, sel.slots, sel.tags)
    if values[BRANCH_TAGS_FIRST] > values[BRANCH_SLOTS_FIRST]:
        winner = BRANCH_TAGS_FIRST
    else:
        winner = BRANCH_SLOTS_FIRST
    sel, trace = branches[winner]
    return winner, sel, values[winner], trace


def orthant_greedy(instance: InfluenceInstance, k: int, l: int,
                   mode: str = "incremental") -> SolveResult:
    """Greedy per ground set, both orders, keeping the better result."""
    _check_budgets(instance, k, l)
    if mode not in ("incremental", "lazy"):
        raise ValueError(f"unknown mode {mode!r}")
    t0 = time.perf_counter()
    counter = EvalCounter()

    def slot_loop(state, trace):
        return greedy_select_slots(state, k, mode=mode, counter=counter, trace=trace)

    def tag_loop(state, trace):
        return greedy_select_tags(state, l, mode=mode, counter=counter, trace=trace)

    branches = {
        BRANCH_SLOTS_FIRST: _run_branch(instance, BRANCH_SLOTS_FIRST,
                                        slot_loop, tag_loop),
        BRANCH_TAGS_FIRST: _run_branch(instance, BRANCH_TAGS_FIRST,
                                       slot_loop, tag_loop),
    }
    winner, sel, value, trace = _pick_winner(instance, branches)
    ms = int(round((time.perf_counter() - t0) * 1000))
    return SolveResult(sel, value, counter.units, ms, tuple(trace), winner)


def stochastic_greedy(instance: InfluenceInstance, k: int, l: int,
                      params: StochasticParams) -> SolveResult:
    """Sampled greedy: each round maximises over a fresh uniform sample."""
    _check_budgets(instance, k, l)
    t0 = time.perf_counter()
    counter = EvalCounter()
    rng = np.random.default_rng(params.seed)
    a = params.a if params.a is not None else instance.n_slots
    b = params.b if params.b is not None else instance.n_tags
    slot_m = sample_size(a, k, params.epsilon)
    tag_m = sample_size(b, l, params.epsilon)

    def slot_loop(state, trace):
        phase = _SlotPhase(state, inline_q=True)
        return _greedy_stochastic(phase, phase.pool(), k, slot_m, rng, counter, trace)

    def tag_loop(state, trace):
        phase = _TagPhase(state)
        return _greedy_stochastic(phase, phase.pool(), l, tag_m, rng, counter, trace)

    # sampling order is fixed: slots-first branch, then tags-first branch
    branches = {
        BRANCH_SLOTS_FIRST: _run_branch(instance, BRANCH_SLOTS_FIRST,
                                        slot_loop, tag_loop),
        BRANCH_TAGS_FIRST: _run_branch(instance, BRANCH_TAGS_FIRST,
                                       slot_loop, tag_loop),
    }
    winner, sel, value, trace = _pick_winner(instance, branches)
    ms = int(round((time.perf_counter() - t0) * 1000))
    return SolveResult(sel, value, counter.units, ms, tuple(trace), winner)


def exhaustive_search(instance: InfluenceInstance, k: int, l: int,
                      cap: int = DEFAULT_CAP) -> SolveResult:
    """Exact optimum by enumerating every (k slots, l tags) pair.

    Ties break toward the lexicographically smallest (slot ids, tag ids)
    sequence. Raises :class:`CapExceededError` when the number of candidate
    pairs exceeds ``cap``.
    """
    _check_budgets(instance, k, l)
    n_s, n_t, n_u = instance.n_slots, instance.n_tags, instance.n_users
    combos = math.comb(n_s, k) * math.comb(n_t, l)
    if combos > cap:
        raise CapExceededError(
            f"{combos} candidate pairs exceed the cap of {cap}")
    t0 = time.perf_counter()
    counter = EvalCounter()
    indptr, users, P = instance.vis_indptr, instance.vis_users, instance.probs

    tag_sets = list(itertools.combinations(range(n_t), l))
    qs = [_kernels.pair_effective_probs(P, list(H)) for H in tag_sets]

    best_val = -1.0
    best = None
    for S in itertools.combinations(range(n_s), k):
        for H, q in zip(tag_sets, qs):
            surv = np.ones(n_u, dtype=np.float64)
            for s in S:
                lo, hi = int(indptr[s]), int(indptr[s + 1])
                surv[users[lo:hi]] *= 1.0 - q[lo:hi]
            val = float(n_u - surv.sum())
            counter.full()
            if val > best_val:
                best_val, best = val, (S, H)
    ms = int(round((time.perf_counter() - t0) * 1000))
    sel = Selection(tuple(best[0]), tuple(best[1]))
    return SolveResult(sel, best_val, counter.units, ms, (), None)
