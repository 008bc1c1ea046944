"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the survival-product kernels: influence
is recomputed through per-user probability lookups and plain Python float
products, so they stay an independent check on the fast paths.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from bbinf.domain import InfluenceInstance, Slot, TagRecord, TimeInterval
from bbinf.ingest import IngestConfig, SyntheticSpec, generate_synthetic


def build_instance(n_users, n_tags, slot_specs, pair_probs, delta=10,
                   t1=0, lambda_m=100.0, default_slot_probs=None):
    """Hand-built instance for exact-value tests.

    slot_specs: list of (billboard_index, window_start) per slot id.
    pair_probs: {(slot, user): [p_tag0, ..., p_tagN, p_default]}.
    """
    n_slots = len(slot_specs)
    n_billboards = max(b for b, _ in slot_specs) + 1
    max_end = max(start for _, start in slot_specs) + delta - 1
    slots = tuple(Slot(i, b, TimeInterval(start, start + delta - 1))
                  for i, (b, start) in enumerate(slot_specs))
    tags = tuple(TagRecord(c, cost=1.0, weight=1.0, label=f"t{c}")
                 for c in range(n_tags))

    keys = sorted(pair_probs)
    slot_of_row = np.array([s for s, _ in keys], dtype=np.int64)
    vis_users = np.array([u for _, u in keys], dtype=np.int64)
    vis_indptr = np.zeros(n_slots + 1, dtype=np.int64)
    np.add.at(vis_indptr, slot_of_row + 1, 1)
    np.cumsum(vis_indptr, out=vis_indptr)
    P = np.zeros((len(keys), n_tags + 1), dtype=np.float64)
    for r, key in enumerate(keys):
        row = pair_probs[key]
        assert len(row) == n_tags + 1
        P[r] = row

    order = np.lexsort((slot_of_row, vis_users))
    uvis_slots = slot_of_row[order]
    uvis_pairs = order.astype(np.int64)
    uvis_indptr = np.zeros(n_users + 1, dtype=np.int64)
    np.add.at(uvis_indptr, vis_users + 1, 1)
    np.cumsum(uvis_indptr, out=uvis_indptr)

    dsp = (np.full(n_tags + 1, 0.1) if default_slot_probs is None
           else np.asarray(default_slot_probs, dtype=np.float64))
    return InfluenceInstance(
        slots=slots, tags=tags,
        user_labels=tuple(f"u{i}" for i in range(n_users)),
        billboard_labels=tuple(f"b{i}" for i in range(n_billboards)),
        t1=t1, t2=max_end, delta=delta, lambda_m=lambda_m,
        vis_indptr=vis_indptr, vis_users=vis_users,
        uvis_indptr=uvis_indptr, uvis_slots=uvis_slots, uvis_pairs=uvis_pairs,
        probs=P, default_slot_probs=dsp,
    )


def random_instance(rng, n_users=12, n_billboards=3, windows=2, n_tags=3,
                    density=0.5, delta=10):
    """Random but structurally valid instance; fast enough for 1000-case suites."""
    n_slots = n_billboards * windows
    pair_probs = {}
    for s in range(n_slots):
        for u in range(n_users):
            if rng.random() < density:
                pair_probs[(s, u)] = rng.uniform(0.0, 1.0, n_tags + 1)
    if not pair_probs:  # keep at least one visible pair
        pair_probs[(0, 0)] = rng.uniform(0.0, 1.0, n_tags + 1)
    slot_specs = [(b, j * delta) for b in range(n_billboards) for j in range(windows)]
    dsp = rng.uniform(0.0, 0.4, n_tags + 1)
    return build_instance(n_users, n_tags, slot_specs, pair_probs, delta=delta,
                          default_slot_probs=dsp)


def random_instance_arrays(rng, n_users, n_billboards, windows, n_tags,
                           density, delta=10):
    """Vectorised random instance builder for the larger randomized suites."""
    from bbinf.ingest import _inverse_visibility
    n_slots = n_billboards * windows
    mask = rng.random((n_slots, n_users)) < density
    if not mask.any():
        mask[0, 0] = True
    slot_of_row, vis_users = np.nonzero(mask)
    vis_users = vis_users.astype(np.int64)
    counts = mask.sum(axis=1)
    vis_indptr = np.zeros(n_slots + 1, dtype=np.int64)
    np.cumsum(counts, out=vis_indptr[1:])
    P = rng.uniform(0.0, 1.0, (len(vis_users), n_tags + 1))
    dsp = rng.uniform(0.0, 0.4, n_tags + 1)
    uvis_indptr, uvis_slots, uvis_pairs = _inverse_visibility(
        n_users, vis_indptr, vis_users)
    slots = tuple(Slot(b * windows + j, b, TimeInterval(j * delta, (j + 1) * delta - 1))
                  for b in range(n_billboards) for j in range(windows))
    tags = tuple(TagRecord(c, 1.0, 1.0, f"t{c}") for c in range(n_tags))
    return InfluenceInstance(
        slots=slots, tags=tags,
        user_labels=tuple(f"u{i}" for i in range(n_users)),
        billboard_labels=tuple(f"b{i}" for i in range(n_billboards)),
        t1=0, t2=windows * delta - 1, delta=delta, lambda_m=100.0,
        vis_indptr=vis_indptr, vis_users=vis_users,
        uvis_indptr=uvis_indptr, uvis_slots=uvis_slots, uvis_pairs=uvis_pairs,
        probs=P, default_slot_probs=dsp,
    )


def small_synthetic(seed, n_users=15, n_billboards=6, n_tags=3, n_tuples=50,
                    windows=1, delta=8, box_km=1.2, lambda_m=150.0):
    """Small synthetic instance built through the real ingest path.

    The default ~1.2 km box with a 150 m radius gives partial visibility, so
    no single slot reaches every user.
    """
    dlat = box_km / 111.2
    dlon = box_km / (111.2 * 0.757)
    cfg = IngestConfig(t1=0, t2=windows * delta - 1, delta=delta,
                       lambda_m=lambda_m, prob_mode="synthetic")
    spec = SyntheticSpec(n_users=n_users, n_billboards=n_billboards,
                         n_tags=n_tags, n_tuples=n_tuples, seed=seed,
                         geo_box=(40.75, 40.75 + dlat, -74.0, -74.0 + dlon))
    return generate_synthetic(spec, cfg)


# ---------------------------------------------------------------------------
# oracles

def oracle_user_probability(inst, u, slots, tags):
    prod = 1.0
    for s in slots:
        for c in tags:
            prod *= 1.0 - inst.prob(u, s, c)
    return 1.0 - prod


def oracle_influence(inst, slots, tags):
    return sum(oracle_user_probability(inst, u, slots, tags)
               for u in range(inst.n_users))


def oracle_exhaustive(inst, k, l):
    """Second, independently coded enumerator (lexicographic tie-break)."""
    best_val, best = -1.0, None
    for S in itertools.combinations(range(inst.n_slots), k):
        for H in itertools.combinations(range(inst.n_tags), l):
            v = oracle_influence(inst, S, H)
            if v > best_val:
                best_val, best = v, (S, H)
    return best, best_val


def random_selection(rng, inst, max_slots=None, max_tags=None):
    k = int(rng.integers(0, (max_slots or inst.n_slots) + 1))
    l = int(rng.integers(0, (max_tags or inst.n_tags) + 1))
    slots = [int(s) for s in rng.choice(inst.n_slots, size=k, replace=False)] if k else []
    tags = [int(c) for c in rng.choice(inst.n_tags, size=l, replace=False)] if l else []
    return slots, tags


@pytest.fixture(scope="session")
def tiny_two_slot():
    """2 slots, 2 tags, 3 users with round-number probabilities."""
    pair_probs = {
        (0, 0): [0.5, 0.5, 0.5],
        (0, 1): [0.3, 0.0, 0.5],
        (1, 1): [0.4, 0.2, 1.0],
        (1, 2): [0.0, 0.6, 0.25],
    }
    return build_instance(n_users=3, n_tags=2,
                          slot_specs=[(0, 0), (1, 0)],
                          pair_probs=pair_probs,
                          default_slot_probs=[0.2, 0.1, 0.15])
