"""Comparison heuristics that skip marginal-gain computation.

Six recipes, each returning a :class:`~bbinf.solvers.SolveResult`:

* RSRT   - k random slots, l random tags
* RSHFT  - k random slots, top-l tags by user frequency
* MAXSRT - top-k slots by coverage (distinct viewers), l random tags
* TSTT   - top-k slots and top-l tags by singleton influence
* TSRT   - top-k slots by singleton influence, l random tags
* RSTT   - k random slots, top-l tags by singleton influence

Random draws are uniform without replacement and deterministic given the
seed. "Top" rankings sort descending with lowest-id tie-breaking.
``eval_count`` counts only the singleton influence evaluations a kind needs
for its rankings.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .domain import InfluenceInstance, Selection
from .influence import aggregated_influence
from .solvers import SolveResult, _check_budgets

BASELINE_KINDS = ("RSRT", "RSHFT", "MAXSRT", "TSTT", "TSRT", "RSTT")


def slot_coverage(instance: InfluenceInstance, s: int) -> int:
    """Number of distinct users that can see slot ``s``."""
    if not 0 <= s < instance.n_slots:
        raise KeyError(f"unknown slot id {s}")
    return int(instance.vis_indptr[s + 1] - instance.vis_indptr[s])


def tag_frequency(instance: InfluenceInstance, c: int) -> int:
    """Number of distinct users with a positive probability for tag ``c``."""
    if not 0 <= c < instance.n_tags:
        raise KeyError(f"unknown tag id {c}")
    pos = instance.probs[:, c] > 0.0
    return int(np.unique(instance.vis_users[pos]).size)


def _rank_desc(values: np.ndarray) -> list[int]:
    # stable sort on id, then stable sort descending on value
    order = np.lexsort((np.arange(len(values)), -values))
    return [int(i) for i in order]


def singleton_slot_values(instance: InfluenceInstance) -> np.ndarray:
    """Influence of each slot alone, shown with the default tag."""
    q = instance.probs[:, instance.n_tags]
    surv = np.ones(instance.n_users, dtype=np.float64)
    return _kernels.slot_gains_all(instance.vis_indptr, instance.vis_users, q, surv)


def singleton_tag_values(instance: InfluenceInstance) -> np.ndarray:
    """Influence of each tag alone, shown on the default slot."""
    return instance.n_users * instance.default_slot_probs[:instance.n_tags]


def singleton_influence_rankings(instance: InfluenceInstance):
    """(slots ranked by singleton influence, tags ranked likewise)."""
    return (_rank_desc(singleton_slot_values(instance)),
            _rank_desc(singleton_tag_values(instance)))


def _random_pick(rng, n, count):
    picks = rng.choice(n, size=count, replace=False)
    return [int(x) for x in picks]


def run_baseline(instance: InfluenceInstance, kind: str, k: int, l: int,
                 seed: int = 0) -> SolveResult:
    """Run one baseline recipe; see the module docstring for the kinds."""
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline kind {kind!r}")
    _check_budgets(instance, k, l)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    evals = 0

    if kind == "RSRT":
        slots = _random_pick(rng, instance.n_slots, k)
        tags = _random_pick(rng, instance.n_tags, l)
    elif kind == "RSHFT":
        freq = np.array([tag_frequency(instance, c) for c in range(instance.n_tags)],
                        dtype=np.float64)
        tags = _rank_desc(freq)[:l]
        slots = _random_pick(rng, instance.n_slots, k)
    elif kind == "MAXSRT":
        cover = np.diff(instance.vis_indptr).astype(np.float64)
        slots = _rank_desc(cover)[:k]
        tags = _random_pick(rng, instance.n_tags, l)
    elif kind == "TSTT":
        slot_rank, tag_rank = singleton_influence_rankings(instance)
        evals = instance.n_slots + instance.n_tags
        slots, tags = slot_rank[:k], tag_rank[:l]
    elif kind == "TSRT":
        slots = _rank_desc(singleton_slot_values(instance))[:k]
        evals = instance.n_slots
        tags = _random_pick(rng, instance.n_tags, l)
    else:  # RSTT
        tags = _rank_desc(singleton_tag_values(instance))[:l]
        evals = instance.n_tags
        slots = _random_pick(rng, instance.n_slots, k)

    sel = Selection(tuple(slots), tuple(tags))
    value = aggregated_influence(instance, sel.slots, sel.tags)
    ms = int(round((time.perf_counter() - t0) * 1000))
    return SolveResult(sel, value, evals, ms, (), None)
