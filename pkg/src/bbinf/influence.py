"""Influence evaluation under the independent-exposure survival model.

A user u exposed to slot set S and tag set H is influenced with probability

    1 - prod_{s in S visible to u} prod_{c in H} (1 - Pr(u, s | c))

and the objective is the sum of those probabilities over all users, i.e. the
expected number of influenced users. Every selected tag counts on every
selected slot the user can see.

``SurvivalState`` keeps the inner product per user (the "survival" of u, the
probability that nothing influenced them yet), which turns marginal gains
into sums over just the users a candidate touches instead of full
re-evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .domain import InfluenceInstance, Selection

VALUE_TOL = 1e-9


def _tag_cols(instance: InfluenceInstance, tags) -> list[int]:
    cols = []
    for c in tags:
        if not 0 <= c <= instance.n_tags:
            raise KeyError(f"unknown tag id {c}")
        cols.append(int(c))
    return cols


def _split_slots(instance: InfluenceInstance, slots):
    real, has_default = [], False
    for s in slots:
        if s == instance.default_slot_id:
            has_default = True
        elif 0 <= s < instance.n_slots:
            real.append(int(s))
        else:
            raise KeyError(f"unknown slot id {s}")
    return real, has_default


def survival_array(instance: InfluenceInstance, slots, tags) -> np.ndarray:
    """Per-user survival product for the given slot and tag ids."""
    surv = np.ones(instance.n_users, dtype=np.float64)
    cols = _tag_cols(instance, tags)
    real, has_default = _split_slots(instance, slots)
    if not cols:
        return surv
    col_arr = np.asarray(cols, dtype=np.int64)
    for s in real:
        lo, hi = int(instance.vis_indptr[s]), int(instance.vis_indptr[s + 1])
        _kernels.commit_slot_rows_cols(lo, hi, instance.vis_users,
                                       instance.probs, col_arr, surv)
    if has_default:
        factor = float(np.prod(1.0 - instance.default_slot_probs[cols]))
        _kernels.scale_all(surv, factor)
    return surv


def user_probability(instance: InfluenceInstance, u: int, slots, tags) -> float:
    """Probability that user ``u`` is influenced by the given selection."""
    if not 0 <= u < instance.n_users:
        raise KeyError(f"unknown user id {u}")
    cols = _tag_cols(instance, tags)
    real, has_default = _split_slots(instance, slots)
    if not cols:
        return 0.0
    prod = 1.0
    for s in real:
        idx = instance.pair_index(u, s)
        if idx < 0:
            continue
        for c in cols:
            prod *= 1.0 - instance.probs[idx, c]
    if has_default:
        for c in cols:
            prod *= 1.0 - instance.default_slot_probs[c]
    return 1.0 - prod


def aggregated_influence(instance: InfluenceInstance, slots, tags) -> float:
    """Expected number of influenced users; 0 when either side is empty."""
    surv = survival_array(instance, slots, tags)
    return float(instance.n_users - surv.sum())


def base_slot_influence(instance: InfluenceInstance, slots) -> float:
    """Tag-free influence of a slot set under the panel-size probabilities.

    Equal to ``aggregated_influence(slots, [default_tag_id])``.
    """
    return aggregated_influence(instance, slots, [instance.default_tag_id])


@dataclass
class SurvivalState:
    """Incrementally maintained selection with per-user survival products.

    ``value`` always equals the influence of the committed selection to
    within accumulated rounding. Gains are pure reads; commits mutate.
    """

    instance: InfluenceInstance
    survival: np.ndarray
    slots: list[int]
    tags: list[int]
    value: float

    @property
    def selection(self) -> Selection:
        return Selection(tuple(self.slots), tuple(self.tags))


def new_state(instance: InfluenceInstance, slots=(), tags=()) -> SurvivalState:
    """Build a state whose survival and value match the given selection."""
    slots, tags = list(slots), list(tags)
    if len(set(slots)) != len(slots):
        raise ValueError("duplicate slot ids in initial selection")
    if len(set(tags)) != len(tags):
        raise ValueError("duplicate tag ids in initial selection")
    surv = survival_array(instance, slots, tags)
    value = float(instance.n_users - surv.sum())
    return SurvivalState(instance, surv, slots, tags, value)


def _slot_row_factors(state: SurvivalState, s: int):
    """(lo, hi, q_rows) for real slot s given the state's committed tags."""
    inst = state.instance
    lo, hi = int(inst.vis_indptr[s]), int(inst.vis_indptr[s + 1])
    cols = state.tags
    if not cols:
        return lo, hi, np.zeros(hi - lo, dtype=np.float64)
    q = 1.0 - np.prod(1.0 - inst.probs[lo:hi, cols], axis=1)
    return lo, hi, q


def marginal_gain_slot(state: SurvivalState, s: int) -> float:
    """Influence gained by adding slot ``s``; the state is not modified."""
    inst = state.instance
    if s in state.slots:
        raise ValueError(f"slot {s} already selected")
    if not state.tags:
        return 0.0
    if s == inst.default_slot_id:
        factor = 1.0 - float(np.prod(1.0 - inst.default_slot_probs[state.tags]))
        return factor * float(state.survival.sum())
    if not 0 <= s < inst.n_slots:
        raise KeyError(f"unknown slot id {s}")
    lo, hi, q = _slot_row_factors(state, s)
    users = inst.vis_users[lo:hi]
    return float(np.add.reduce(state.survival[users] * q)) if hi > lo else 0.0


def _tag_user_factors(state: SurvivalState, c: int) -> np.ndarray:
    """Per-user survival factor tag ``c`` would add through committed slots."""
    inst = state.instance
    real, has_default = _split_slots(inst, state.slots)
    factors = np.ones(inst.n_users, dtype=np.float64)
    for s in real:
        lo, hi = int(inst.vis_indptr[s]), int(inst.vis_indptr[s + 1])
        factors[inst.vis_users[lo:hi]] *= 1.0 - inst.probs[lo:hi, c]
    if has_default:
        factors *= 1.0 - inst.default_slot_probs[c]
    return factors


def marginal_gain_tag(state: SurvivalState, c: int) -> float:
    """Influence gained by adding tag ``c``; the state is not modified."""
    inst = state.instance
    if c in state.tags:
        raise ValueError(f"tag {c} already selected")
    if not 0 <= c <= inst.n_tags:
        raise KeyError(f"unknown tag id {c}")
    if not state.slots:
        return 0.0
    factors = _tag_user_factors(state, c)
    return float(np.add.reduce(state.survival * (1.0 - factors)))


def commit_slot(state: SurvivalState, s: int) -> SurvivalState:
    """Add slot ``s``, updating survival and cached value in place."""
    inst = state.instance
    gain = marginal_gain_slot(state, s)
    if s == inst.default_slot_id:
        if state.tags:
            factor = float(np.prod(1.0 - inst.default_slot_probs[state.tags]))
            _kernels.scale_all(state.survival, factor)
    elif state.tags:
        lo, hi, q = _slot_row_factors(state, s)
        _kernels.multiply_rows(lo, hi, inst.vis_users, 1.0 - q, state.survival)
    state.slots.append(int(s))
    state.value += gain
    return state


def commit_tag(state: SurvivalState, c: int) -> SurvivalState:
    """Add tag ``c``, updating survival and cached value in place."""
    gain = marginal_gain_tag(state, c)
    if state.slots:
        factors = _tag_user_factors(state, c)
        state.survival *= factors
        state.survival[state.survival < _kernels.SURVIVAL_FLOOR] = 0.0
    state.tags.append(int(c))
    state.value += gain
    return state
