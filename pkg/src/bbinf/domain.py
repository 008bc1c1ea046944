"""Core problem types for billboard slot / advertisement tag selection.

A problem instance couples billboard slots (a billboard crossed with a fixed
time window), advertisement tags, and the set of users that can see each slot,
with a per-(user, slot, tag) influence probability. Everything downstream
(influence evaluation, greedy solvers, baselines) works against the arrays
stored here.

All types are treated as immutable after construction; numpy arrays are
flagged read-only so instances can be shared freely across workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from functools import cached_property

import numpy as np

UserId = int
SlotId = int
TagId = int
BillboardId = int

EARTH_RADIUS_M = 6_371_000.0


class BbinfError(Exception):
    """Base class for errors raised by this package."""


class IngestError(BbinfError):
    """Malformed or inconsistent input data."""


class InfeasibleBudgetError(BbinfError):
    """Requested slot/tag budget cannot be met by the instance."""


class CapExceededError(BbinfError):
    """Exhaustive enumeration would exceed the configured combination cap."""


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters. Accepts scalars or numpy arrays."""
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(x, dtype=np.float64))
                              for x in (lat1, lon1, lat2, lon2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass(frozen=True, slots=True)
class GeoPoint:
    lat: float
    lon: float


@dataclass(frozen=True, slots=True)
class TimeInterval:
    """Closed integer interval [start, end] in abstract time units."""

    start: int
    end: int

    def overlaps(self, other: "TimeInterval") -> bool:
        """True when the two closed intervals share at least one time unit."""
        return self.start <= other.end and other.start <= self.end

    @property
    def units(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True, slots=True)
class TrajectoryTuple:
    """A set of people seen at one location over one time interval.

    ``users`` holds dense user ids, sorted and duplicate-free.
    """

    users: tuple[int, ...]
    loc: GeoPoint
    interval: TimeInterval


@dataclass(frozen=True, slots=True)
class Billboard:
    id: int
    loc: GeoPoint
    panel_size: float
    cost: float
    label: str = ""


@dataclass(frozen=True, slots=True)
class Slot:
    """One billboard shown over one window of ``delta`` consecutive time units.

    The window is the closed interval [start, start + delta - 1], so
    ``window.units == delta``.
    """

    id: int
    billboard: int
    window: TimeInterval


@dataclass(frozen=True, slots=True)
class TagRecord:
    id: int
    cost: float
    weight: float = 1.0
    label: str = ""


@dataclass(frozen=True, slots=True)
class Selection:
    """Ordered, duplicate-free slot and tag id choices (greedy pick order)."""

    slots: tuple[int, ...] = ()
    tags: tuple[int, ...] = ()


@dataclass
class InfluenceInstance:
    """A fully assembled selection problem.

    Visibility is stored twice: CSR over slots (``vis_indptr``/``vis_users``)
    and CSR over users (``uvis_indptr``/``uvis_slots``), with ``uvis_pairs``
    mapping each inverse entry back to its row in ``probs``. Row i of
    ``probs`` holds the influence probabilities of visible pair i for every
    real tag, plus a final column for the virtual default tag (the tag-free
    panel-size probability of the slot's billboard).

    Two virtual elements exist besides the real ground sets: a default slot
    visible to every user with a per-tag constant probability
    (``default_slot_probs``), and the default tag column mentioned above.
    Their ids are ``default_slot_id`` (= number of real slots) and
    ``default_tag_id`` (= number of real tags). Solvers seed greedy runs with
    them; they never appear in returned selections.
    """

    slots: tuple[Slot, ...]
    tags: tuple[TagRecord, ...]
    user_labels: tuple[str, ...]
    billboard_labels: tuple[str, ...]
    t1: int
    t2: int
    delta: int
    lambda_m: float
    vis_indptr: np.ndarray        # (n_slots+1,) int64
    vis_users: np.ndarray         # (nnz,) int64, sorted within each slot
    uvis_indptr: np.ndarray       # (n_users+1,) int64
    uvis_slots: np.ndarray        # (nnz,) int64, sorted within each user
    uvis_pairs: np.ndarray        # (nnz,) int64 row index into probs
    probs: np.ndarray             # (nnz, n_tags+1) float64
    default_slot_probs: np.ndarray  # (n_tags+1,) float64

    def __post_init__(self):
        for name in ("vis_indptr", "vis_users", "uvis_indptr", "uvis_slots",
                     "uvis_pairs", "probs", "default_slot_probs"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def n_users(self) -> int:
        return len(self.user_labels)

    @property
    def users(self) -> range:
        return range(self.n_users)

    @property
    def n_pairs(self) -> int:
        return len(self.vis_users)

    @property
    def default_slot_id(self) -> int:
        return self.n_slots

    @property
    def default_tag_id(self) -> int:
        return self.n_tags

    def visible_users(self, s: int) -> np.ndarray:
        """Dense user ids that can see slot ``s`` (read-only view)."""
        if s == self.default_slot_id:
            return np.arange(self.n_users, dtype=np.int64)
        return self.vis_users[self.vis_indptr[s]:self.vis_indptr[s + 1]]

    def visible_slots(self, u: int) -> np.ndarray:
        """Slot ids visible to user ``u`` (read-only view, excludes virtuals)."""
        return self.uvis_slots[self.uvis_indptr[u]:self.uvis_indptr[u + 1]]

    def pair_index(self, u: int, s: int) -> int:
        """Row of ``probs`` for visible pair (u, s), or -1 when invisible."""
        lo, hi = self.uvis_indptr[u], self.uvis_indptr[u + 1]
        j = np.searchsorted(self.uvis_slots[lo:hi], s)
        if j < hi - lo and self.uvis_slots[lo + j] == s:
            return int(self.uvis_pairs[lo + j])
        return -1

    def prob(self, u: int, s: int, c: int) -> float:
        """Pr(user u influenced by tag c on slot s); 0 for invisible pairs.

        Accepts the virtual ids: ``s == default_slot_id`` reads the default
        slot table, ``c == default_tag_id`` reads the default tag column.
        """
        if not 0 <= c <= self.n_tags:
            raise KeyError(f"unknown tag id {c}")
        if s == self.default_slot_id:
            return float(self.default_slot_probs[c])
        if not 0 <= s < self.n_slots:
            raise KeyError(f"unknown slot id {s}")
        if not 0 <= u < self.n_users:
            raise KeyError(f"unknown user id {u}")
        idx = self.pair_index(u, s)
        if idx < 0:
            return 0.0
        return float(self.probs[idx, c])

    @cached_property
    def digest(self) -> str:
        """Content hash over everything that determines influence values."""
        h = hashlib.sha256()
        h.update(repr((self.t1, self.t2, self.delta, self.lambda_m)).encode())
        h.update("\x1f".join(self.user_labels).encode())
        h.update("\x1f".join(self.billboard_labels).encode())
        for s in self.slots:
            h.update(repr((s.id, s.billboard, s.window.start, s.window.end)).encode())
        for t in self.tags:
            h.update(repr((t.id, t.label, t.cost, t.weight)).encode())
        for name in ("vis_indptr", "vis_users", "uvis_indptr", "uvis_slots", "uvis_pairs"):
            h.update(np.ascontiguousarray(getattr(self, name)).tobytes())
        h.update(np.ascontiguousarray(self.probs).tobytes())
        h.update(np.ascontiguousarray(self.default_slot_probs).tobytes())
        return h.hexdigest()


def validate_instance(instance: InfluenceInstance) -> list[str]:
    """Check every structural invariant; returns one message per violation.

    An empty list means the instance is well formed. Nothing is raised:
    callers that want hard failures assert on the result.
    """
    out: list[str] = []
    inst = instance
    n_slots, n_tags, n_users = inst.n_slots, inst.n_tags, inst.n_users

    for i, s in enumerate(inst.slots):
        if s.id != i:
            out.append(f"slot at position {i} carries id {s.id}; ids must be dense from 0")
        if not (0 <= s.billboard < len(inst.billboard_labels)):
            out.append(f"slot {i} references unknown billboard {s.billboard}")
        if s.window.start > s.window.end:
            out.append(f"slot {i} window start {s.window.start} > end {s.window.end}")
        elif s.window.units != inst.delta:
            out.append(f"slot {i} window spans {s.window.units} units, expected delta={inst.delta}")
        if s.window.start < inst.t1 or s.window.end > inst.t2:
            out.append(f"slot {i} window [{s.window.start},{s.window.end}] outside horizon "
                       f"[{inst.t1},{inst.t2}]")
    for i, t in enumerate(inst.tags):
        if t.id != i:
            out.append(f"tag at position {i} carries id {t.id}; ids must be dense from 0")

    if inst.vis_indptr.shape != (n_slots + 1,):
        out.append("vis_indptr length does not match slot count")
        return out  # structure too broken for the remaining checks
    if np.any(np.diff(inst.vis_indptr) < 0) or inst.vis_indptr[0] != 0 \
            or inst.vis_indptr[-1] != inst.n_pairs:
        out.append("vis_indptr is not a monotone CSR index over the pair rows")
        return out
    if inst.probs.shape != (inst.n_pairs, n_tags + 1):
        out.append(f"probs shape {inst.probs.shape} != (n_pairs, n_tags+1)")
        return out

    for s in range(n_slots):
        users = inst.visible_users(s)
        if users.size and (users.min() < 0 or users.max() >= n_users):
            out.append(f"slot {s} visibility references unknown users")
        if users.size > 1 and np.any(np.diff(users) <= 0):
            out.append(f"slot {s} visibility list is not sorted/unique")

    bad = ~np.isfinite(inst.probs) | (inst.probs < 0.0) | (inst.probs > 1.0)
    if np.any(bad):
        rows, cols = np.nonzero(bad)
        # map each offending row back to (user, slot)
        slot_of_row = np.repeat(np.arange(n_slots), np.diff(inst.vis_indptr))
        for r, c in zip(rows[:20], cols[:20]):
            u = int(inst.vis_users[r])
            s = int(slot_of_row[r])
            tag = "default" if c == n_tags else str(int(c))
            out.append(f"probability out of [0,1] at (user={u}, slot={s}, tag={tag}): "
                       f"{inst.probs[r, c]!r}")
    if np.any(~np.isfinite(inst.default_slot_probs)
              | (inst.default_slot_probs < 0.0) | (inst.default_slot_probs > 1.0)):
        out.append("default slot probability outside [0,1]")

    # forward CSR and inverse CSR must describe the same pair set
    if inst.uvis_indptr.shape != (n_users + 1,) or len(inst.uvis_slots) != inst.n_pairs \
            or len(inst.uvis_pairs) != inst.n_pairs:
        out.append("inverse visibility index shape does not match the forward index")
    else:
        slot_of_row = np.repeat(np.arange(n_slots), np.diff(inst.vis_indptr))
        fwd = set(zip(slot_of_row.tolist(), inst.vis_users.tolist()))
        inv = set()
        ok = True
        for u in range(n_users):
            lo, hi = inst.uvis_indptr[u], inst.uvis_indptr[u + 1]
            for j in range(lo, hi):
                s = int(inst.uvis_slots[j])
                row = int(inst.uvis_pairs[j])
                inv.add((s, u))
                if not (0 <= row < inst.n_pairs) or int(slot_of_row[row]) != s \
                        or int(inst.vis_users[row]) != u:
                    out.append(f"inverse visibility entry (user={u}, slot={s}) maps to "
                               f"wrong probability row {row}")
                    ok = False
        if ok and fwd != inv:
            for s, u in sorted(fwd - inv)[:10]:
                out.append(f"pair (user={u}, slot={s}) present forward but missing "
                           f"from the inverse index")
            for s, u in sorted(inv - fwd)[:10]:
                out.append(f"pair (user={u}, slot={s}) present in the inverse index "
                           f"but not forward")
    return out


def check_selection(instance: InfluenceInstance, selection: Selection,
                    allow_virtual: bool = False) -> list[str]:
    """Validate a selection against an instance (ids, duplicates)."""
    out = []
    max_s = instance.n_slots + (1 if allow_virtual else 0)
    max_c = instance.n_tags + (1 if allow_virtual else 0)
    if len(set(selection.slots)) != len(selection.slots):
        out.append("duplicate slot ids in selection")
    if len(set(selection.tags)) != len(selection.tags):
        out.append("duplicate tag ids in selection")
    for s in selection.slots:
        if not 0 <= s < max_s:
            out.append(f"unknown slot id {s}")
    for c in selection.tags:
        if not 0 <= c < max_c:
            out.append(f"unknown tag id {c}")
    return out
