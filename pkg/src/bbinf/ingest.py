"""Loading, generating, and serialising selection problem instances.

File formats (UTF-8 CSV with a header row):

* trajectories: ``user_ids,lat,lon,t_start,t_end`` (user_ids ';'-separated)
* billboards:   ``billboard_id,lat,lon,panel_size,cost``
* tags:         ``tag_id,cost[,weight]`` (weight defaults to 1.0)
* explicit probabilities: ``user_id,billboard_id,tag_id,prob``

Assembled instances serialise to a single JSON document; see
:func:`instance_to_obj` for the layout.

Probability model: a billboard's base probability is its panel size divided
by the largest panel size. In ``panel_size_base`` mode the probability of
(user, slot, tag) is base(slot's billboard) * weight(tag); in
``explicit_file`` mode the real-tag probabilities come from the explicit
file, keyed by billboard and broadcast to every slot of that billboard the
user sees. Either way the virtual default tag column carries the bare base
probability and the virtual default slot is visible to everyone with
probability clip(mean base * weight(tag), 0, 1).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import (Billboard, GeoPoint, InfluenceInstance, IngestError, Slot,
                     TagRecord, TimeInterval, TrajectoryTuple, haversine_m)

TRAJECTORY_HEADER = ["user_ids", "lat", "lon", "t_start", "t_end"]
BILLBOARD_HEADER = ["billboard_id", "lat", "lon", "panel_size", "cost"]
TAG_HEADER = ["tag_id", "cost"]
TAG_HEADER_W = ["tag_id", "cost", "weight"]
PROBS_HEADER = ["user_id", "billboard_id", "tag_id", "prob"]

PROB_MODES = ("panel_size_base", "explicit_file", "synthetic")


@dataclass(frozen=True)
class IngestConfig:
    """Horizon, slot duration, visibility radius, and probability mode."""

    t1: int = 0
    t2: int = 191
    delta: int = 8
    lambda_m: float = 100.0
    prob_mode: str = "panel_size_base"

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError("slot duration must be a positive integer")
        if self.t1 > self.t2:
            raise ValueError("horizon start exceeds horizon end")
        if self.lambda_m <= 0:
            raise ValueError("visibility radius must be positive")
        if self.prob_mode not in PROB_MODES:
            raise ValueError(f"prob_mode must be one of {PROB_MODES}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the seeded synthetic generator."""

    n_users: int
    n_billboards: int
    n_tags: int
    n_tuples: int
    seed: int = 0
    geo_box: tuple[float, float, float, float] = (40.740, 40.758, -74.000, -73.976)
    tag_skew: float = 2.0

    def __post_init__(self):
        for name in ("n_users", "n_billboards", "n_tags", "n_tuples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        lat_lo, lat_hi, lon_lo, lon_hi = self.geo_box
        if not (lat_lo < lat_hi and lon_lo < lon_hi):
            raise ValueError("geo_box must be (lat_lo, lat_hi, lon_lo, lon_hi) with lo < hi")
        if self.tag_skew <= 0:
            raise ValueError("tag_skew must be positive")


class IdAssigner:
    """Maps external string labels to dense ids in first-seen order."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self.labels: list[str] = []

    def assign(self, label: str) -> int:
        got = self._ids.get(label)
        if got is None:
            got = len(self.labels)
            self._ids[label] = got
            self.labels.append(label)
        return got

    def get(self, label: str) -> int:
        if label not in self._ids:
            raise KeyError(label)
        return self._ids[label]

    def __len__(self) -> int:
        return len(self.labels)


def _read_rows(path, expected_headers):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IngestError(f"{path}: {e}") from e
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise IngestError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if header not in expected_headers:
        raise IngestError(f"{path}: unexpected header {header}; "
                          f"expected one of {expected_headers}")
    return path, header, rows[1:]


def _parse_float(path, lineno, name, raw):
    try:
        v = float(raw)
    except ValueError:
        raise IngestError(f"{path}:{lineno}: {name} {raw!r} is not a number") from None
    if not math.isfinite(v):
        raise IngestError(f"{path}:{lineno}: {name} must be finite")
    return v


def _parse_int(path, lineno, name, raw):
    try:
        return int(raw)
    except ValueError:
        raise IngestError(f"{path}:{lineno}: {name} {raw!r} is not an integer") from None


def _parse_latlon(path, lineno, raw_lat, raw_lon) -> GeoPoint:
    lat = _parse_float(path, lineno, "lat", raw_lat)
    lon = _parse_float(path, lineno, "lon", raw_lon)
    if not -90.0 <= lat <= 90.0:
        raise IngestError(f"{path}:{lineno}: latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise IngestError(f"{path}:{lineno}: longitude {lon} outside [-180, 180]")
    return GeoPoint(lat, lon)


def load_trajectories(path, users: IdAssigner | None = None) -> list[TrajectoryTuple]:
    """Read the trajectory CSV; one tuple per row, row order preserved.

    User labels get dense ids in order of first appearance. Pass an
    :class:`IdAssigner` to keep the label table (and to share ids with an
    explicit probability file).
    """
    users = users if users is not None else IdAssigner()
    path, _, rows = _read_rows(path, [TRAJECTORY_HEADER])
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise IngestError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        labels = [tok.strip() for tok in row[0].split(";") if tok.strip()]
        if not labels:
            raise IngestError(f"{path}:{lineno}: empty user list")
        loc = _parse_latlon(path, lineno, row[1], row[2])
        t_start = _parse_int(path, lineno, "t_start", row[3])
        t_end = _parse_int(path, lineno, "t_end", row[4])
        if t_start > t_end:
            raise IngestError(f"{path}:{lineno}: t_start {t_start} > t_end {t_end}")
        ids = sorted({users.assign(lab) for lab in labels})
        out.append(TrajectoryTuple(tuple(ids), loc, TimeInterval(t_start, t_end)))
    return out


def load_billboards(path) -> list[Billboard]:
    """Read the billboard CSV; dense ids follow row order."""
    path, _, rows = _read_rows(path, [BILLBOARD_HEADER])
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 5:
            raise IngestError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        label = row[0].strip()
        loc = _parse_latlon(path, lineno, row[1], row[2])
        size = _parse_float(path, lineno, "panel_size", row[3])
        cost = _parse_float(path, lineno, "cost", row[4])
        if size <= 0:
            raise IngestError(f"{path}:{lineno}: panel_size must be positive, got {size}")
        if cost < 0:
            raise IngestError(f"{path}:{lineno}: cost must be non-negative, got {cost}")
        out.append(Billboard(len(out), loc, size, cost, label))
    return out


def load_tags(path) -> list[TagRecord]:
    """Read the tag CSV; the weight column is optional and defaults to 1."""
    path, header, rows = _read_rows(path, [TAG_HEADER, TAG_HEADER_W])
    has_weight = len(header) == 3
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise IngestError(f"{path}:{lineno}: expected {len(header)} fields, "
                              f"got {len(row)}")
        cost = _parse_float(path, lineno, "cost", row[1])
        if cost < 0:
            raise IngestError(f"{path}:{lineno}: cost must be non-negative")
        weight = _parse_float(path, lineno, "weight", row[2]) if has_weight else 1.0
        if weight < 0:
            raise IngestError(f"{path}:{lineno}: weight must be non-negative")
        out.append(TagRecord(len(out), cost, weight, row[0].strip()))
    return out


def load_explicit_probs(path) -> list[tuple[str, str, str, float]]:
    """Read sparse (user, billboard, tag, prob) rows; labels left unmapped."""
    path, _, rows = _read_rows(path, [PROBS_HEADER])
    out = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 4:
            raise IngestError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        p = _parse_float(path, lineno, "prob", row[3])
        if not 0.0 <= p <= 1.0:
            raise IngestError(f"{path}:{lineno}: prob {p} outside [0, 1]")
        out.append((row[0].strip(), row[1].strip(), row[2].strip(), p))
    return out


def enumerate_slots(billboards: list[Billboard], horizon: TimeInterval,
                    delta: int) -> list[Slot]:
    """All (billboard, window) slots on the delta grid inside the horizon.

    Windows cover delta consecutive time units starting at t1, t1+delta, ...;
    a final partial window is dropped, so the count is exactly
    ``len(billboards) * ((t2 - t1 + 1) // delta)``.
    """
    if delta < 1:
        raise ValueError("delta must be a positive integer")
    windows = (horizon.end - horizon.start + 1) // delta
    out = []
    sid = 0
    for b in billboards:
        for j in range(windows):
            start = horizon.start + j * delta
            out.append(Slot(sid, b.id, TimeInterval(start, start + delta - 1)))
            sid += 1
    return out


def build_visibility(tuples: list[TrajectoryTuple], billboards: list[Billboard],
                     slots: list[Slot], lambda_m: float):
    """CSR visibility index: which users can see which slot.

    A user sees a slot when some trajectory tuple containing them lies within
    ``lambda_m`` meters of the slot's billboard and its interval shares at
    least one time unit with the slot's window (closed intervals). Repeat
    sightings of the same (user, slot) pair collapse to one entry.

    Returns ``(vis_indptr, vis_users)`` in the layout InfluenceInstance uses.
    """
    n_slots = len(slots)
    by_billboard: dict[int, list[Slot]] = {}
    for s in slots:
        by_billboard.setdefault(s.billboard, []).append(s)
    starts = {}
    ids = {}
    length = {}
    for b, ss in by_billboard.items():
        ss = sorted(ss, key=lambda s: s.window.start)
        starts[b] = np.array([s.window.start for s in ss], dtype=np.int64)
        ids[b] = np.array([s.id for s in ss], dtype=np.int64)
        length[b] = ss[0].window.units if ss else 0

    bb_ids = np.array(sorted(by_billboard), dtype=np.int64)
    bb_lat = np.array([billboards[b].loc.lat for b in bb_ids])
    bb_lon = np.array([billboards[b].loc.lon for b in bb_ids])

    pairs: set[tuple[int, int]] = set()
    for p in tuples:
        if len(bb_ids) == 0:
            break
        dist = haversine_m(p.loc.lat, p.loc.lon, bb_lat, bb_lon)
        for b in bb_ids[dist <= lambda_m]:
            b = int(b)
            st = starts[b]
            # window [w, w + len - 1] overlaps [p.start, p.end] iff
            # p.start - len + 1 <= w <= p.end
            lo = int(np.searchsorted(st, p.interval.start - length[b] + 1, side="left"))
            hi = int(np.searchsorted(st, p.interval.end, side="right"))
            for j in range(lo, hi):
                sid = int(ids[b][j])
                for u in p.users:
                    pairs.add((sid, u))

    if pairs:
        arr = np.array(sorted(pairs), dtype=np.int64)
        slot_of_row, vis_users = arr[:, 0], np.ascontiguousarray(arr[:, 1])
    else:
        slot_of_row = np.zeros(0, dtype=np.int64)
        vis_users = np.zeros(0, dtype=np.int64)
    vis_indptr = np.zeros(n_slots + 1, dtype=np.int64)
    np.add.at(vis_indptr, slot_of_row + 1, 1)
    np.cumsum(vis_indptr, out=vis_indptr)
    return vis_indptr, vis_users


def derive_base_probabilities(billboards: list[Billboard]) -> dict[int, float]:
    """Panel-size probabilities: each size divided by the largest size."""
    if not billboards:
        raise IngestError("cannot derive base probabilities from an empty billboard list")
    biggest = max(b.panel_size for b in billboards)
    return {b.id: b.panel_size / biggest for b in billboards}


def _inverse_visibility(n_users, vis_indptr, vis_users):
    slot_of_row = np.repeat(np.arange(len(vis_indptr) - 1, dtype=np.int64),
                            np.diff(vis_indptr))
    order = np.lexsort((slot_of_row, vis_users))
    uvis_slots = slot_of_row[order]
    uvis_pairs = order.astype(np.int64)
    uvis_indptr = np.zeros(n_users + 1, dtype=np.int64)
    np.add.at(uvis_indptr, vis_users + 1, 1)
    np.cumsum(uvis_indptr, out=uvis_indptr)
    return uvis_indptr, uvis_slots, uvis_pairs


def assemble_instance(tuples, billboards, tags, config: IngestConfig,
                      explicit_probs=None, user_labels=None,
                      default_slot_probs=None) -> InfluenceInstance:
    """Build the full instance: slots, visibility, probabilities, defaults.

    ``user_labels`` is the dense-id label table from loading (generated
    labels are used if omitted). ``default_slot_probs`` overrides the virtual
    default slot's per-tag probability table.
    """
    n_tags = len(tags)
    slots = enumerate_slots(billboards, TimeInterval(config.t1, config.t2), config.delta)
    vis_indptr, vis_users = build_visibility(tuples, billboards, slots, config.lambda_m)
    nnz = len(vis_users)

    if user_labels is None:
        n_users = max((max(p.users) for p in tuples if p.users), default=-1) + 1
        user_labels = tuple(f"u{i}" for i in range(n_users))
    else:
        user_labels = tuple(user_labels)
    n_users = len(user_labels)

    base = derive_base_probabilities(billboards)
    slot_of_row = np.repeat(np.arange(len(slots), dtype=np.int64), np.diff(vis_indptr))
    bb_of_slot = np.array([s.billboard for s in slots], dtype=np.int64)
    base_arr = np.array([base[b.id] for b in billboards], dtype=np.float64)
    base_of_row = base_arr[bb_of_slot[slot_of_row]] if nnz else np.zeros(0)

    weights = np.array([t.weight for t in tags], dtype=np.float64)
    P = np.zeros((nnz, n_tags + 1), dtype=np.float64)
    P[:, n_tags] = base_of_row
    mode = config.prob_mode
    if mode in ("panel_size_base", "synthetic"):
        P[:, :n_tags] = base_of_row[:, None] * weights[None, :]
        if P.size and (P.max() > 1.0 or P.min() < 0.0):
            bad = int(np.argmax(P[:, :n_tags].max(axis=0) > 1.0))
            raise IngestError(f"tag {tags[bad].label or bad}: base * weight leaves [0, 1]")
    elif mode == "explicit_file":
        if explicit_probs:
            user_ids = {lab: i for i, lab in enumerate(user_labels)}
            bb_ids = {b.label or str(b.id): b.id for b in billboards}
            tag_ids = {t.label or str(t.id): t.id for t in tags}
            pair_row = {}
            for row, (s, u) in enumerate(zip(slot_of_row.tolist(), vis_users.tolist())):
                pair_row[(s, u)] = row
            slots_of_bb: dict[int, list[int]] = {}
            for s in slots:
                slots_of_bb.setdefault(s.billboard, []).append(s.id)
            for u_lab, b_lab, c_lab, p in explicit_probs:
                if u_lab not in user_ids:
                    raise IngestError(f"explicit probability references unknown user {u_lab!r}")
                if b_lab not in bb_ids:
                    raise IngestError(f"explicit probability references unknown billboard {b_lab!r}")
                if c_lab not in tag_ids:
                    raise IngestError(f"explicit probability references unknown tag {c_lab!r}")
                u, b, c = user_ids[u_lab], bb_ids[b_lab], tag_ids[c_lab]
                rows = [pair_row[(sid, u)] for sid in slots_of_bb.get(b, ())
                        if (sid, u) in pair_row]
                if not rows:
                    raise IngestError(
                        f"explicit probability for ({u_lab!r}, {b_lab!r}) but user "
                        f"{u_lab!r} sees no slot of that billboard")
                P[rows, c] = p

    if default_slot_probs is None:
        mean_base = float(base_arr.mean())
        default_slot_probs = np.clip(
            np.concatenate([mean_base * weights, [mean_base]]), 0.0, 1.0)
    else:
        default_slot_probs = np.asarray(default_slot_probs, dtype=np.float64)
        if default_slot_probs.shape != (n_tags + 1,):
            raise IngestError("default_slot_probs must have one entry per tag "
                              "plus the default tag")

    uvis_indptr, uvis_slots, uvis_pairs = _inverse_visibility(
        n_users, vis_indptr, vis_users)
    return InfluenceInstance(
        slots=tuple(slots),
        tags=tuple(tags),
        user_labels=user_labels,
        billboard_labels=tuple(b.label or f"b{b.id}" for b in billboards),
        t1=config.t1, t2=config.t2, delta=config.delta, lambda_m=config.lambda_m,
        vis_indptr=vis_indptr, vis_users=vis_users,
        uvis_indptr=uvis_indptr, uvis_slots=uvis_slots, uvis_pairs=uvis_pairs,
        probs=P, default_slot_probs=default_slot_probs,
    )


def synthesize_raw(spec: SyntheticSpec, t1: int = 0, t2: int = 191):
    """Deterministic raw ingredients (tuples, billboards, tags, user labels).

    Tuple intervals fall inside [t1, t2] with lengths of 4 to 32 time units
    (clipped to the horizon).
    """
    rng = np.random.default_rng(spec.seed)
    lat_lo, lat_hi, lon_lo, lon_hi = spec.geo_box
    horizon_units = t2 - t1 + 1
    max_len = min(32, horizon_units)
    min_len = min(4, max_len)

    billboards = []
    for i in range(spec.n_billboards):
        loc = GeoPoint(float(rng.uniform(lat_lo, lat_hi)),
                       float(rng.uniform(lon_lo, lon_hi)))
        size = float(rng.uniform(50.0, 500.0))
        cost = float(rng.uniform(10.0, 1000.0))
        billboards.append(Billboard(i, loc, size, cost, f"b{i}"))

    tags = []
    for i in range(spec.n_tags):
        weight = float(rng.uniform(0.0, 1.0) ** spec.tag_skew)
        cost = float(rng.uniform(1.0, 100.0))
        tags.append(TagRecord(i, cost, weight, f"t{i}"))

    tuples = []
    for _ in range(spec.n_tuples):
        group = int(rng.integers(1, 6))
        users = rng.choice(spec.n_users, size=min(group, spec.n_users), replace=False)
        loc = GeoPoint(float(rng.uniform(lat_lo, lat_hi)),
                       float(rng.uniform(lon_lo, lon_hi)))
        length = int(rng.integers(min_len, max_len + 1))
        start = int(rng.integers(t1, t2 - length + 2))
        tuples.append(TrajectoryTuple(tuple(sorted(int(u) for u in users)),
                                      loc, TimeInterval(start, start + length - 1)))

    user_labels = tuple(f"u{i}" for i in range(spec.n_users))
    return tuples, billboards, tags, user_labels


def generate_synthetic(spec: SyntheticSpec,
                       config: IngestConfig | None = None) -> InfluenceInstance:
    """Seeded synthetic instance; equal specs give identical instances."""
    config = config if config is not None else IngestConfig(prob_mode="synthetic")
    tuples, billboards, tags, user_labels = synthesize_raw(spec, config.t1, config.t2)
    return assemble_instance(tuples, billboards, tags, config,
                             user_labels=user_labels)


# ---------------------------------------------------------------------------
# serialisation

def instance_to_obj(inst: InfluenceInstance) -> dict:
    """JSON-ready document. ``probs`` rows are [user, slot, tag, p] with only
    nonzero entries; the tag index may equal the tag count, which addresses
    the virtual default tag column."""
    visibility = {str(s): inst.visible_users(s).tolist() for s in range(inst.n_slots)}
    rows = []
    slot_of_row = np.repeat(np.arange(inst.n_slots, dtype=np.int64),
                            np.diff(inst.vis_indptr))
    for r in range(inst.n_pairs):
        u, s = int(inst.vis_users[r]), int(slot_of_row[r])
        for c in range(inst.n_tags + 1):
            p = float(inst.probs[r, c])
            if p != 0.0:
                rows.append([u, s, c, p])
    return {
        "meta": {"t1": inst.t1, "t2": inst.t2, "delta": inst.delta,
                 "lambda_m": inst.lambda_m},
        "slots": [{"id": s.id, "billboard": inst.billboard_labels[s.billboard],
                   "start": s.window.start, "end": s.window.end}
                  for s in inst.slots],
        "tags": [{"id": t.id, "label": t.label, "cost": t.cost, "weight": t.weight}
                 for t in inst.tags],
        "users": list(inst.user_labels),
        "visibility": visibility,
        "probs": rows,
        "defaults": {"slot_probs": inst.default_slot_probs.tolist()},
    }


def instance_from_obj(obj: dict) -> InfluenceInstance:
    try:
        meta = obj["meta"]
        t1, t2 = int(meta["t1"]), int(meta["t2"])
        delta, lambda_m = int(meta["delta"]), float(meta["lambda_m"])
        user_labels = tuple(str(u) for u in obj["users"])

        bb_assign = IdAssigner()
        slots = []
        for rec in obj["slots"]:
            b = bb_assign.assign(str(rec["billboard"]))
            slots.append(Slot(int(rec["id"]), b,
                              TimeInterval(int(rec["start"]), int(rec["end"]))))
        tags = [TagRecord(int(rec["id"]), float(rec["cost"]),
                          float(rec.get("weight", 1.0)), str(rec.get("label", "")))
                for rec in obj["tags"]]

        n_slots, n_tags, n_users = len(slots), len(tags), len(user_labels)
        vis_indptr = np.zeros(n_slots + 1, dtype=np.int64)
        lists = []
        for s in range(n_slots):
            us = sorted(int(u) for u in obj["visibility"].get(str(s), []))
            lists.append(us)
            vis_indptr[s + 1] = vis_indptr[s] + len(us)
        vis_users = np.array([u for us in lists for u in us], dtype=np.int64)

        pair_row = {}
        r = 0
        for s in range(n_slots):
            for u in lists[s]:
                pair_row[(s, u)] = r
                r += 1
        P = np.zeros((r, n_tags + 1), dtype=np.float64)
        for u, s, c, p in obj["probs"]:
            u, s, c = int(u), int(s), int(c)
            if (s, u) not in pair_row:
                raise IngestError(f"probability row for invisible pair "
                                  f"(user={u}, slot={s})")
            if not 0 <= c <= n_tags:
                raise IngestError(f"probability row references unknown tag {c}")
            P[pair_row[(s, u)], c] = float(p)

        dsp = np.asarray(obj["defaults"]["slot_probs"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as e:
        raise IngestError(f"malformed instance document: {e}") from e

    uvis_indptr, uvis_slots, uvis_pairs = _inverse_visibility(
        n_users, vis_indptr, vis_users)
    return InfluenceInstance(
        slots=tuple(slots), tags=tuple(tags), user_labels=user_labels,
        billboard_labels=tuple(bb_assign.labels),
        t1=t1, t2=t2, delta=delta, lambda_m=lambda_m,
        vis_indptr=vis_indptr, vis_users=vis_users,
        uvis_indptr=uvis_indptr, uvis_slots=uvis_slots, uvis_pairs=uvis_pairs,
        probs=P, default_slot_probs=dsp,
    )


def instance_to_json(inst: InfluenceInstance) -> bytes:
    return json.dumps(instance_to_obj(inst), separators=(",", ":")).encode("utf-8")


def save_instance(inst: InfluenceInstance, path) -> str:
    """Write the instance JSON; returns its content digest."""
    Path(path).write_bytes(instance_to_json(inst))
    return inst.digest


def load_instance(path) -> InfluenceInstance:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IngestError(f"{path}: {e}") from e
    return instance_from_obj(obj)


# ---------------------------------------------------------------------------
# CSV writers (round-trip partners of the loaders)

def write_trajectories_csv(path, tuples, user_labels):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for p in tuples:
            w.writerow([";".join(user_labels[u] for u in p.users),
                        repr(p.loc.lat), repr(p.loc.lon),
                        p.interval.start, p.interval.end])


def write_billboards_csv(path, billboards):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BILLBOARD_HEADER)
        for b in billboards:
            w.writerow([b.label or f"b{b.id}", repr(b.loc.lat), repr(b.loc.lon),
                        repr(b.panel_size), repr(b.cost)])


def write_tags_csv(path, tags):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(TAG_HEADER_W)
        for t in tags:
            w.writerow([t.label or f"t{t.id}", repr(t.cost), repr(t.weight)])


def write_probs_csv(path, rows):
    """``rows`` holds (user_label, billboard_label, tag_label, prob)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(PROBS_HEADER)
        for u, b, c, p in rows:
            w.writerow([u, b, c, repr(p)])
