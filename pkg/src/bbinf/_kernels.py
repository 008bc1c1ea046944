"""Hot numeric kernels for survival-product influence evaluation.

Two interchangeable backends implement the same array contracts:

* ``numba``  - @njit compiled loops (default when numba imports cleanly)
* ``numpy``  - vectorised fallback with no compilation step

Select explicitly with the ``BBINF_BACKEND`` environment variable
(``numba`` or ``numpy``), read once at import time. The solvers only care
that, within one process, repeated calls on identical inputs return
identical floats; cross-backend results agree to rounding error, which the
test suite checks. The numpy implementations stay importable under the
``np_*`` names either way (the benchmark script compares them).

Data layout shared by every kernel: visibility is CSR over slots
(``indptr``/``users``), ``q`` holds one effective probability per visible
(user, slot) pair, and ``surv`` is the per-user survival product.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("BBINF_BACKEND", "").strip().lower()
if _env not in ("", "numba", "numpy"):
    raise RuntimeError(f"BBINF_BACKEND must be 'numba' or 'numpy', got {_env!r}")

_want_numba = _env != "numpy"
if _want_numba:
    try:
        from numba import njit
    except ImportError:
        if _env == "numba":
            raise
        _want_numba = False

BACKEND = "numba" if _want_numba else "numpy"

# survival values below this are snapped to zero to avoid denormal churn
SURVIVAL_FLOOR = 1e-300


def _segment_sums(vals: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Sum ``vals`` over the CSR segments described by ``indptr``."""
    n = len(indptr) - 1
    out = np.zeros(n, dtype=np.float64)
    if len(vals) == 0:
        return out
    counts = np.diff(indptr)
    nz = counts > 0
    if not np.any(nz):
        return out
    out[nz] = np.add.reduceat(vals, indptr[:-1][nz])
    return out


def np_slot_gains_all(indptr, users, q, surv):
    return _segment_sums(surv[users] * q, indptr)


def np_slot_gains_subset(slot_ids, indptr, users, q, surv):
    if len(slot_ids) == 0:
        return np.zeros(0, dtype=np.float64)
    counts = indptr[slot_ids + 1] - indptr[slot_ids]
    total = int(counts.sum())
    if total == 0:
        return np.zeros(len(slot_ids), dtype=np.float64)
    # gather the chosen slots' pair rows into one contiguous buffer so each
    # per-segment reduction sees the same operand order as np_slot_gains_all
    rows = np.empty(total, dtype=np.int64)
    sub_indptr = np.zeros(len(slot_ids) + 1, dtype=np.int64)
    np.cumsum(counts, out=sub_indptr[1:])
    pos = 0
    for s in slot_ids:
        lo, hi = int(indptr[s]), int(indptr[s + 1])
        rows[pos:pos + hi - lo] = np.arange(lo, hi)
        pos += hi - lo
    vals = surv[users[rows]] * q[rows]
    return _segment_sums(vals, sub_indptr)


def np_commit_slot_rows(lo, hi, users, q, surv):
    idx = users[lo:hi]
    v = surv[idx] * (1.0 - q[lo:hi])
    v[v < SURVIVAL_FLOOR] = 0.0
    surv[idx] = v


def _np_inline_q(rows, P, cols):
    # 1 - (1 - ...) mirrors the precomputed q path bit for bit
    acc = np.ones(len(rows), dtype=np.float64)
    for c in cols:
        acc *= 1.0 - P[rows, c]
    return 1.0 - acc


def np_slot_gains_subset_cols(slot_ids, indptr, users, P, cols, surv):
    if len(slot_ids) == 0:
        return np.zeros(0, dtype=np.float64)
    counts = indptr[slot_ids + 1] - indptr[slot_ids]
    total = int(counts.sum())
    if total == 0:
        return np.zeros(len(slot_ids), dtype=np.float64)
    rows = np.empty(total, dtype=np.int64)
    sub_indptr = np.zeros(len(slot_ids) + 1, dtype=np.int64)
    np.cumsum(counts, out=sub_indptr[1:])
    pos = 0
    for s in slot_ids:
        lo, hi = int(indptr[s]), int(indptr[s + 1])
        rows[pos:pos + hi - lo] = np.arange(lo, hi)
        pos += hi - lo
    q = _np_inline_q(rows, P, cols)
    return _segment_sums(surv[users[rows]] * q, sub_indptr)


def np_commit_slot_rows_cols(lo, hi, users, P, cols, surv):
    rows = np.arange(lo, hi)
    q = _np_inline_q(rows, P, cols)
    idx = users[lo:hi]
    v = surv[idx] * (1.0 - q)
    v[v < SURVIVAL_FLOOR] = 0.0
    surv[idx] = v


def np_multiply_rows(lo, hi, users, factors, surv):
    idx = users[lo:hi]
    v = surv[idx] * factors
    v[v < SURVIVAL_FLOOR] = 0.0
    surv[idx] = v


def np_dot_complement(surv, col):
    # np.add.reduce keeps single-candidate and batched tag gains identical,
    # unlike BLAS-backed np.dot whose blocking can vary with shape
    return float(np.add.reduce(surv * (1.0 - col)))


def np_scale_all(surv, factor):
    surv *= factor
    surv[surv < SURVIVAL_FLOOR] = 0.0


if BACKEND == "numba":

    @njit(cache=True)
    def slot_gains_all(indptr, users, q, surv):
        n = len(indptr) - 1
        out = np.empty(n, dtype=np.float64)
        for s in range(n):
            acc = 0.0
            for i in range(indptr[s], indptr[s + 1]):
                acc += surv[users[i]] * q[i]
            out[s] = acc
        return out

    @njit(cache=True)
    def slot_gains_subset(slot_ids, indptr, users, q, surv):
        out = np.empty(len(slot_ids), dtype=np.float64)
        for j in range(len(slot_ids)):
            s = slot_ids[j]
            acc = 0.0
            for i in range(indptr[s], indptr[s + 1]):
                acc += surv[users[i]] * q[i]
            out[j] = acc
        return out

    @njit(cache=True)
    def commit_slot_rows(lo, hi, users, q, surv):
        for i in range(lo, hi):
            u = users[i]
            v = surv[u] * (1.0 - q[i])
            if v < SURVIVAL_FLOOR:
                v = 0.0
            surv[u] = v

    @njit(cache=True)
    def multiply_rows(lo, hi, users, factors, surv):
        for i in range(lo, hi):
            u = users[i]
            v = surv[u] * factors[i - lo]
            if v < SURVIVAL_FLOOR:
                v = 0.0
            surv[u] = v

    @njit(cache=True)
    def slot_gains_subset_cols(slot_ids, indptr, users, P, cols, surv):
        out = np.empty(len(slot_ids), dtype=np.float64)
        for j in range(len(slot_ids)):
            s = slot_ids[j]
            acc = 0.0
            for i in range(indptr[s], indptr[s + 1]):
                f = 1.0
                for t in range(len(cols)):
                    f *= 1.0 - P[i, cols[t]]
                q = 1.0 - f
                acc += surv[users[i]] * q
            out[j] = acc
        return out

    @njit(cache=True)
    def commit_slot_rows_cols(lo, hi, users, P, cols, surv):
        for i in range(lo, hi):
            f = 1.0
            for t in range(len(cols)):
                f *= 1.0 - P[i, cols[t]]
            q = 1.0 - f
            u = users[i]
            v = surv[u] * (1.0 - q)
            if v < SURVIVAL_FLOOR:
                v = 0.0
            surv[u] = v

    @njit(cache=True)
    def dot_complement(surv, col):
        acc = 0.0
        for u in range(len(surv)):
            acc += surv[u] * (1.0 - col[u])
        return acc

    @njit(cache=True)
    def scale_all(surv, factor):
        for u in range(len(surv)):
            v = surv[u] * factor
            if v < SURVIVAL_FLOOR:
                v = 0.0
            surv[u] = v

else:
    slot_gains_all = np_slot_gains_all
    slot_gains_subset = np_slot_gains_subset
    commit_slot_rows = np_commit_slot_rows
    multiply_rows = np_multiply_rows
    dot_complement = np_dot_complement
    scale_all = np_scale_all
    slot_gains_subset_cols = np_slot_gains_subset_cols
    commit_slot_rows_cols = np_commit_slot_rows_cols


def pair_effective_probs(P: np.ndarray, tag_cols) -> np.ndarray:
    """Per-pair probability that at least one of ``tag_cols`` influences.

    q[i] = 1 - prod_c (1 - P[i, c]). Empty tag sets give all zeros. The
    column-order accumulation here is the reference rounding sequence; the
    on-the-fly kernels below reproduce it factor by factor.
    """
    if len(tag_cols) == 0:
        return np.zeros(len(P), dtype=np.float64)
    acc = np.ones(len(P), dtype=np.float64)
    for c in tag_cols:
        acc *= 1.0 - P[:, c]
    return 1.0 - acc


def user_tag_products(slot_rows, P: np.ndarray, n_users: int,
                      indptr: np.ndarray, users: np.ndarray) -> np.ndarray:
    """Per-user product of (1 - P) over the pair rows of the given slots.

    Returns M of shape (n_users, P.shape[1]); M[u, c] is the survival factor
    tag c would contribute through every listed slot visible to u. Users that
    see none of the slots keep a row of ones.
    """
    M = np.ones((n_users, P.shape[1]), dtype=np.float64)
    for s in slot_rows:
        lo, hi = int(indptr[s]), int(indptr[s + 1])
        if hi > lo:
            # users are unique within one slot, so in-place fancy indexing is safe
            M[users[lo:hi], :] *= 1.0 - P[lo:hi, :]
    return M
