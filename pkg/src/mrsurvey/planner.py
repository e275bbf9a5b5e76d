"""Joint-action planning for multi-robot time-critical inspection.

A joint action sends every robot toward one remaining PoI and lasts
until the earliest arrival-plus-inspection completes; that PoI is
revealed, the finishing robot is re-assigned from wherever it stands,
and the process repeats on the shrunken state.  Cost accrues at
cost_rate * (sum of remaining likelihoods) per second, so the optimal
plan reveals probably-damaged PoIs as early as possible.

The search is exact depth-first branch and bound over assignment/reveal
sequences: robots commit to targets one at a time in robot-index order,
each reveal frees the finishing robot to re-commit from its interpolated
position, and partial commitments are pruned with an admissible
completion bound that respects in-flight targets.  Depth counts
reveals; at depth_cap a greedy nearest-PoI rollout completes the value.
With more PoIs than n_priority, planning restricts itself to a priority
subset (top likelihoods plus nearest-per-robot fill).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np


@dataclass(frozen=True)
class RobotState:
    index: int
    x: float
    y: float
    speed: float = 1.0


@dataclass(frozen=True)
class JointAction:
    """One target PoI id per robot, ordered by robot index."""

    targets: Tuple[int, ...]


@dataclass(frozen=True)
class PlanningState:
    """Remaining PoIs plus robot poses; arrays are row-aligned with poi_ids.

    poi_ids is sorted ascending; treat all arrays as immutable.
    """

    poi_ids: Tuple[int, ...]
    poi_xy: np.ndarray
    inspect_times: np.ndarray
    likelihoods: np.ndarray
    robot_xy: np.ndarray
    robot_speeds: np.ndarray
    elapsed: float = 0.0

    @property
    def n_pois(self) -> int:
        return len(self.poi_ids)

    @property
    def n_robots(self) -> int:
        return len(self.robot_xy)

    def index_of(self, poi_id: int) -> int:
        i = int(np.searchsorted(np.asarray(self.poi_ids), poi_id))
        if i >= len(self.poi_ids) or self.poi_ids[i] != poi_id:
            raise KeyError(f"PoI id {poi_id} not in state")
        return i

    def robots(self) -> Tuple[RobotState, ...]:
        return tuple(
            RobotState(i, float(self.robot_xy[i, 0]), float(self.robot_xy[i, 1]), float(self.robot_speeds[i]))
            for i in range(self.n_robots)
        )

    def subset(self, poi_ids: Sequence[int]) -> "PlanningState":
        keep = sorted(poi_ids)
        idx = [self.index_of(pid) for pid in keep]
        return PlanningState(
            poi_ids=tuple(keep),
            poi_xy=self.poi_xy[idx],
            inspect_times=self.inspect_times[idx],
            likelihoods=self.likelihoods[idx],
            robot_xy=self.robot_xy,
            robot_speeds=self.robot_speeds,
            elapsed=self.elapsed,
        )


def make_state(
    pois: Sequence[Tuple[int, float, float, float, float]],
    robots: Sequence[RobotState],
    elapsed: float = 0.0,
) -> PlanningState:
    """Build a PlanningState from (id, x, y, inspect_time, likelihood) rows."""
    rows = sorted(pois, key=lambda r: r[0])
    ids = tuple(int(r[0]) for r in rows)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate PoI ids")
    xy = np.array([[r[1], r[2]] for r in rows], dtype=float).reshape(len(rows), 2)
    insp = np.array([r[3] for r in rows], dtype=float)
    lik = np.array([r[4] for r in rows], dtype=float)
    if not np.all(np.isfinite(xy)):
        raise ValueError("non-finite PoI position")
    if np.any(insp < 0.0) or not np.all(np.isfinite(insp)):
        raise ValueError("inspect times must be finite and >= 0")
    if np.any(lik < 0.0) or np.any(lik > 1.0):
        raise ValueError("likelihoods must lie in [0, 1]")
    if not robots:
        raise ValueError("at least one robot required")
    rob = np.array([[r.x, r.y] for r in robots], dtype=float)
    spd = np.array([r.speed for r in robots], dtype=float)
    if not np.all(np.isfinite(rob)):
        raise ValueError("non-finite robot position")
    if np.any(spd <= 0.0) or not np.all(np.isfinite(spd)):
        raise ValueError("robot speeds must be finite and > 0")
    return PlanningState(ids, xy, insp, lik, rob, spd, float(elapsed))


@dataclass(frozen=True)
class ActionOutcome:
    duration: float
    first_poi: int
    finishing_robot: int
    successor: PlanningState


@dataclass(frozen=True)
class PlannerConfig:
    depth_cap: int = 4
    n_priority: int = 12
    n_top_prob: int = 6
    cost_rate: float = 1.0
    bound_slack: float = 0.0
    prune: bool = True

    def validate(self) -> None:
        if self.depth_cap < 1:
            raise ValueError("depth_cap must be >= 1")
        if self.n_top_prob > self.n_priority:
            raise ValueError("n_top_prob cannot exceed n_priority")
        if self.n_priority < 1:
            raise ValueError("n_priority must be >= 1")
        if not math.isfinite(self.cost_rate) or self.cost_rate <= 0.0:
            raise ValueError("cost_rate must be finite and > 0")
        if self.bound_slack < 0.0:
            raise ValueError("bound_slack must be >= 0")


@dataclass
class PlanResult:
    action: JointAction
    cost: float
    nodes_expanded: int
    children_pruned: int
    subset_ids: Tuple[int, ...]


@dataclass(frozen=True)
class NodeRecord:
    """Snapshot of a DFS child node, for bound-admissibility audits."""

    poi_ids: Tuple[int, ...]
    robot_xy: Tuple[Tuple[float, float], ...]
    robot_speeds: Tuple[float, ...]
    accrued: float
    bound: float


def travel_time(a: Tuple[float, float], b: Tuple[float, float], speed: float) -> float:
    """Straight-line travel time from a to b at the given speed."""
    if not (math.isfinite(a[0]) and math.isfinite(a[1]) and math.isfinite(b[0]) and math.isfinite(b[1])):
        raise ValueError("non-finite position")
    if not math.isfinite(speed) or speed <= 0.0:
        raise ValueError(f"speed must be finite and > 0, got {speed}")
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy) / speed


# --- joint-action enumeration ------------------------------------------------

_ASSIGNMENT_CACHE: Dict[Tuple[int, int], np.ndarray] = {}


def _assignments(n: int, n_robots: int) -> np.ndarray:
    """All joint assignments as an (m, n_robots) array of PoI indices.

    Distinct targets when n >= n_robots, otherwise every PoI covered at
    least once.  Rows are in lexicographic order (robot index major,
    PoI index minor), which is the canonical enumeration order.
    """
    key = (n, n_robots)
    cached = _ASSIGNMENT_CACHE.get(key)
    if cached is not None:
        return cached
    if n >= n_robots:
        rows = itertools.permutations(range(n), n_robots)
        arr = np.fromiter(
            itertools.chain.from_iterable(rows), dtype=np.int64
        ).reshape(-1, n_robots)
    else:
        full = set(range(n))
        rows = [
            row
            for row in itertools.product(range(n), repeat=n_robots)
            if set(row) == full
        ]
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), n_robots)
    _ASSIGNMENT_CACHE[key] = arr
    return arr


def enumerate_joint_actions(state: PlanningState) -> List[JointAction]:
    if state.n_pois == 0:
        raise ValueError("cannot enumerate actions for an empty remaining set")
    A = _assignments(state.n_pois, state.n_robots)
    ids = state.poi_ids
    return [JointAction(tuple(ids[j] for j in row)) for row in A]


# --- single-action dynamics --------------------------------------------------


def action_outcome(state: PlanningState, action: JointAction) -> ActionOutcome:
    """Apply one joint action: earliest completion reveals its PoI.

    Ties on the completion time go to the lowest PoI id, then the lowest
    robot index.  Non-finishing robots advance toward their targets for
    the duration (capped at the target).
    """
    n, n_rob = state.n_pois, state.n_robots
    if n == 0:
        raise ValueError("empty remaining set")
    if len(action.targets) != n_rob:
        raise ValueError(f"expected {n_rob} targets, got {len(action.targets)}")
    t_idx = [state.index_of(pid) for pid in action.targets]
    if n >= n_rob:
        if len(set(t_idx)) != n_rob:
            raise ValueError("targets must be pairwise distinct when PoIs >= robots")
    else:
        if set(t_idx) != set(range(n)):
            raise ValueError("every remaining PoI must be covered when PoIs < robots")

    tts = []
    finishes = []
    for i in range(n_rob):
        j = t_idx[i]
        dx = state.robot_xy[i, 0] - state.poi_xy[j, 0]
        dy = state.robot_xy[i, 1] - state.poi_xy[j, 1]
        tt = math.sqrt(dx * dx + dy * dy) / state.robot_speeds[i]
        tts.append(tt)
        finishes.append(tt + state.inspect_times[j])
    duration = min(finishes)
    winner = min(
        (i for i in range(n_rob) if finishes[i] == duration),
        key=lambda i: (action.targets[i], i),
    )
    first_poi = action.targets[winner]
    first_idx = t_idx[winner]

    new_rob = state.robot_xy.copy()
    for i in range(n_rob):
        j = t_idx[i]
        frac = 0.0 if tts[i] == 0.0 else min(duration, tts[i]) / tts[i]
        new_rob[i, 0] = state.robot_xy[i, 0] + frac * (state.poi_xy[j, 0] - state.robot_xy[i, 0])
        new_rob[i, 1] = state.robot_xy[i, 1] + frac * (state.poi_xy[j, 1] - state.robot_xy[i, 1])

    keep = [j for j in range(n) if j != first_idx]
    successor = PlanningState(
        poi_ids=tuple(pid for pid in state.poi_ids if pid != first_poi),
        poi_xy=state.poi_xy[keep],
        inspect_times=state.inspect_times[keep],
        likelihoods=state.likelihoods[keep],
        robot_xy=new_rob,
        robot_speeds=state.robot_speeds,
        elapsed=state.elapsed + duration,
    )
    return ActionOutcome(
        duration=float(duration),
        first_poi=int(first_poi),
        finishing_robot=int(winner),
        successor=successor,
    )


# --- bounds and rollout -------------------------------------------------------


def _travel_matrix(rob: np.ndarray, spd: np.ndarray, xy: np.ndarray) -> np.ndarray:
    diff = rob[:, None, :] - xy[None, :, :]
    return np.sqrt((diff * diff).sum(-1)) / spd[:, None]


def lower_bound(state: PlanningState, accrued: float, config: PlannerConfig) -> float:
    """Admissible bound: each PoI revealed by its nearest robot, no queuing.

    accrued + K * sum_l P(l) * (min_r travel_time(r, l) + inspect(l))
    never exceeds the true cost of any completion from this state.
    """
    if state.n_pois == 0:
        return accrued
    tt = _travel_matrix(state.robot_xy, state.robot_speeds, state.poi_xy)
    mind = tt.min(axis=0)
    return accrued + config.cost_rate * float(
        (state.likelihoods * (mind + state.inspect_times)).sum()
    )


def _nearest_assignment(tt: np.ndarray) -> np.ndarray:
    """Greedy per-robot nearest-PoI targets (indices) on a travel matrix.

    Robots claim distinct nearest PoIs in index order; once all PoIs are
    claimed, remaining robots duplicate their nearest.  Row-wise argmin
    takes the first (lowest-id) PoI on ties.
    """
    n_rob, n = tt.shape
    taken = np.zeros(n, dtype=bool)
    out = np.empty(n_rob, dtype=np.int64)
    for i in range(n_rob):
        if taken.all():
            out[i] = int(tt[i].argmin())
        else:
            row = np.where(taken, np.inf, tt[i])
            j = int(row.argmin())
            out[i] = j
            taken[j] = True
    return out


def _rollout(
    ids: np.ndarray,
    xy: np.ndarray,
    insp: np.ndarray,
    lik: np.ndarray,
    rob: np.ndarray,
    spd: np.ndarray,
    k_rate: float,
) -> float:
    """Cost of completing the state with repeated nearest-PoI assignments."""
    total = 0.0
    while ids.size > 0:
        tt = _travel_matrix(rob, spd, xy)
        targets = _nearest_assignment(tt)
        finish = tt[np.arange(len(targets)), targets] + insp[targets]
        duration = float(finish.min())
        winner = min(
            (i for i in range(len(targets)) if finish[i] == duration),
            key=lambda i: (ids[targets[i]], i),
        )
        first_idx = int(targets[winner])
        total += k_rate * duration * float(lik.sum())

        tts = tt[np.arange(len(targets)), targets]
        frac = np.where(tts == 0.0, 0.0, np.minimum(duration, tts) / np.where(tts == 0.0, 1.0, tts))
        rob = rob + frac[:, None] * (xy[targets] - rob)

        keep = np.arange(ids.size) != first_idx
        ids, xy, insp, lik = ids[keep], xy[keep], insp[keep], lik[keep]
    return total


def rollout_estimate(state: PlanningState, config: PlannerConfig) -> float:
    """Upper-bound completion cost from the state via the greedy policy."""
    return _rollout(
        np.asarray(state.poi_ids, dtype=np.int64),
        state.poi_xy,
        state.inspect_times,
        state.likelihoods,
        state.robot_xy,
        state.robot_speeds,
        config.cost_rate,
    )


# --- depth-first branch and bound ---------------------------------------------


def _tail(
    pids: List[int],
    xs: List[float],
    ys: List[float],
    insp: List[float],
    lik: List[float],
    rx: List[float],
    ry: List[float],
    spd: List[float],
    k_rate: float,
) -> float:
    """Greedy completion cost on scalar state; consumes the lists in place.

    Mirrors the array rollout on plain floats: robots claim distinct
    nearest PoIs in the given order (duplicating once all are claimed),
    the earliest completion reveals its PoI, everyone else advances for
    the segment duration.  The search calls this at every leaf, where
    interpreter arithmetic is cheaper than array dispatch on segments
    this small.
    """
    n_rob = len(rx)
    total = 0.0
    while pids:
        a = len(pids)
        taken = [False] * a
        n_taken = 0
        targets = [0] * n_rob
        tts = [0.0] * n_rob
        for i in range(n_rob):
            best_g = -1
            best_t = math.inf
            if n_taken >= a:
                for g in range(a):
                    dx = rx[i] - xs[g]
                    dy = ry[i] - ys[g]
                    t = math.sqrt(dx * dx + dy * dy) / spd[i]
                    if t < best_t:
                        best_t = t
                        best_g = g
            else:
                for g in range(a):
                    if taken[g]:
                        continue
                    dx = rx[i] - xs[g]
                    dy = ry[i] - ys[g]
                    t = math.sqrt(dx * dx + dy * dy) / spd[i]
                    if t < best_t:
                        best_t = t
                        best_g = g
                taken[best_g] = True
                n_taken += 1
            targets[i] = best_g
            tts[i] = best_t
        duration = math.inf
        winner = -1
        for i in range(n_rob):
            fin = tts[i] + insp[targets[i]]
            if fin < duration or (
                fin == duration
                and (pids[targets[i]], i) < (pids[targets[winner]], winner)
            ):
                duration = fin
                winner = i
        psum = 0.0
        for g in range(a):
            psum += lik[g]
        total += k_rate * duration * psum
        for i in range(n_rob):
            t = tts[i]
            frac = 0.0 if t == 0.0 else min(duration, t) / t
            g = targets[i]
            rx[i] = rx[i] + frac * (xs[g] - rx[i])
            ry[i] = ry[i] + frac * (ys[g] - ry[i])
        g = targets[winner]
        del pids[g], xs[g], ys[g], insp[g], lik[g]
    return total


class _SearchStats:
    __slots__ = ("nodes_expanded", "children_pruned")

    def __init__(self) -> None:
        self.nodes_expanded = 0
        self.children_pruned = 0


def _search(
    ids: np.ndarray,
    xy: np.ndarray,
    insp: np.ndarray,
    lik: np.ndarray,
    rob: np.ndarray,
    spd: np.ndarray,
    config: PlannerConfig,
    stats: _SearchStats,
    node_log: Optional[List[NodeRecord]],
) -> Tuple[float, Tuple[int, ...]]:
    """Branch-and-bound minimum over assignment/reveal sequences.

    Nodes alternate between commitment layers (the lowest-index free
    robot picks an unclaimed PoI, or any remaining one once all are
    claimed) and reveal events (earliest completion wins, ties by PoI id
    then robot index).  Ties on cost resolve to the lexicographically
    smallest root target tuple, which is the joint-action enumeration
    order.

    Pruning takes the larger of two admissible completion bounds.  The
    chain bound charges each remaining PoI its earliest possible
    arrival: committed robots must finish their target first, free
    robots travel straight.  Commitment-aware arrivals are only valid
    while targets stay singly claimed, so that bound falls back to the
    position-only form whenever duplicate claims could occur below the
    node.  The serialization bound orders reveals instead: the team's
    j-th reveal cannot precede the j-th smallest completion slot, where
    each robot offers slots starting at its earliest finish and stepping
    by its cheapest hop (pair distance plus inspection); pairing the
    largest likelihoods with the smallest slots bounds the weighted sum
    from below.  The state lives in plain python lists because segments
    are tiny and interpreter arithmetic beats array dispatch here.
    """
    n, n_rob = ids.size, rob.shape[0]
    k_rate = config.cost_rate
    slack = config.bound_slack
    do_prune = config.prune
    cap = config.depth_cap
    rng_rob = range(n_rob)

    pids0 = [int(v) for v in ids]
    xs0 = [float(v) for v in xy[:, 0]]
    ys0 = [float(v) for v in xy[:, 1]]
    insp0 = [float(v) for v in insp]
    lik0 = [float(v) for v in lik]
    rx0 = [float(v) for v in rob[:, 0]]
    ry0 = [float(v) for v in rob[:, 1]]
    spd0 = [float(v) for v in spd]

    dpp0 = [[0.0] * n for _ in range(n)]
    for p in range(n):
        xp = xs0[p]
        yp = ys0[p]
        rowp = dpp0[p]
        for q in range(p + 1, n):
            dx = xp - xs0[q]
            dy = yp - ys0[q]
            d = math.sqrt(dx * dx + dy * dy)
            rowp[q] = d
            dpp0[q][p] = d

    def floor_term(a, insp_s, lik_s, dpp_s, trow_s):
        # Serialization floor on the completion term: slots per robot
        # start at its earliest finish and step by its cheapest hop.
        if a == 1:
            r0 = insp_s[0]
            m = math.inf
            for r in rng_rob:
                f = trow_s[r][0] + r0
                if f < m:
                    m = f
            return lik_s[0] * m
        colmin = [math.inf] * a
        for p in range(a):
            rowp = dpp_s[p]
            for q in range(a):
                if p != q and rowp[q] < colmin[q]:
                    colmin[q] = rowp[q]
        slots = []
        for r in rng_rob:
            row = trow_s[r]
            v = spd0[r]
            m = math.inf
            h = math.inf
            for g in range(a):
                f = row[g] + insp_s[g]
                if f < m:
                    m = f
                c = colmin[g] / v + insp_s[g]
                if c < h:
                    h = c
            s = m
            for _ in range(a):
                slots.append(s)
                s += h
        slots.sort()
        pdesc = sorted(lik_s, reverse=True)
        t = 0.0
        for i in range(a):
            t += pdesc[i] * slots[i]
        return t

    def make_seg(pids_s, xs_s, ys_s, insp_s, lik_s, dpp_s, trow_s):
        sum_ir = 0.0
        psum = 0.0
        for g in range(len(pids_s)):
            sum_ir += lik_s[g] * insp_s[g]
            psum += lik_s[g]
        floor = (
            floor_term(len(pids_s), insp_s, lik_s, dpp_s, trow_s)
            if do_prune
            else 0.0
        )
        return (pids_s, xs_s, ys_s, insp_s, lik_s, dpp_s, trow_s, sum_ir, psum, floor)

    best_cost = math.inf
    best_tuple: Optional[Tuple[int, ...]] = None

    def leaf_update(value: float, root_tuple: Tuple[int, ...]) -> None:
        nonlocal best_cost, best_tuple
        if value < best_cost:
            best_cost = value
            best_tuple = root_tuple
        elif value == best_cost and best_tuple is not None and root_tuple < best_tuple:
            best_tuple = root_tuple

    def assign(seg, targ, prx, pry, arr, accrued, reveals, prefix):
        nonlocal best_cost, best_tuple
        pids_s, xs_s, ys_s, insp_s, lik_s, dpp_s, trow_s, sum_ir, psum, floor = seg
        na = len(pids_s)
        j = -1
        for r in rng_rob:
            if targ[r] < 0:
                j = r
                break
        if j < 0:
            advance(seg, targ, prx, pry, accrued, reveals, prefix)
            return
        stats.nodes_expanded += 1

        # Identical robots (same spot, same speed) take targets in
        # ascending order: each symmetric class is searched once, through
        # its lexicographically smallest representative.  Claims by every
        # other robot count, including ones persisting from earlier
        # reveals, so freed robots never duplicate while unclaimed
        # PoIs remain.
        lo = -1
        committed = set()
        xj = prx[j]
        yj = pry[j]
        vj = spd0[j]
        for r in rng_rob:
            t = targ[r]
            if r == j or t < 0:
                continue
            committed.add(t)
            if t > lo and spd0[r] == vj and prx[r] == xj and pry[r] == yj:
                lo = t
        unclaimed = [i for i in range(na) if i not in committed]
        if unclaimed:
            # Ascending canonicalization only holds where targets are
            # pairwise distinct; duplicate layers enumerate freely.
            choices = [i for i in unclaimed if i > lo]
            duplicating = False
        else:
            choices = list(range(na))
            duplicating = True
        if not choices:
            return  # symmetric classes here are covered by other branches

        rooting = reveals == 0
        rowj = trow_s[j]
        if do_prune:
            reveals_left = cap - reveals
            if reveals_left > na:
                reveals_left = na
            if na - reveals_left >= n_rob and not duplicating:
                # Commitment-aware arrivals are only admissible while
                # targets stay singly claimed below this node.
                om = None
                for r in rng_rob:
                    if r == j:
                        continue
                    rowr = arr[r]
                    if om is None:
                        om = rowr[:]
                    else:
                        for l in range(na):
                            if rowr[l] < om[l]:
                                om[l] = rowr[l]
                bnds = []
                if om is None:
                    for c in choices:
                        fin = rowj[c] + insp_s[c]
                        dc = dpp_s[c]
                        s = 0.0
                        for l in range(na):
                            ch = rowj[c] if l == c else fin + dc[l] / vj
                            s += lik_s[l] * ch
                        t = sum_ir + s
                        if t < floor:
                            t = floor
                        bnds.append(accrued + k_rate * t)
                else:
                    for c in choices:
                        fin = rowj[c] + insp_s[c]
                        dc = dpp_s[c]
                        s = 0.0
                        for l in range(na):
                            ch = rowj[c] if l == c else fin + dc[l] / vj
                            o = om[l]
                            if o < ch:
                                ch = o
                            s += lik_s[l] * ch
                        t = sum_ir + s
                        if t < floor:
                            t = floor
                        bnds.append(accrued + k_rate * t)
            else:
                s = 0.0
                for l in range(na):
                    m = trow_s[0][l]
                    for r in range(1, n_rob):
                        f = trow_s[r][l]
                        if f < m:
                            m = f
                    s += lik_s[l] * m
                t = sum_ir + s
                if t < floor:
                    t = floor
                nb = accrued + k_rate * t
                bnds = [nb] * len(choices)
            seq = sorted(range(len(choices)), key=bnds.__getitem__)
        else:
            bnds = None
            seq = range(len(choices))

        for oi, pos_k in enumerate(seq):
            c = choices[pos_k]
            if do_prune:
                b = bnds[pos_k]
                if slack > 0.0:
                    if b >= best_cost - slack:
                        stats.children_pruned += len(choices) - oi
                        break
                else:
                    # Rounding can push the bound a few ulps past the true
                    # subtree minimum, so strict pruning keeps a margin.
                    if b > best_cost + 1e-9 * (abs(best_cost) + 1.0):
                        stats.children_pruned += len(choices) - oi
                        break
                    if b == best_cost and b == accrued:
                        # Exactly-zero completion bound: the subtree can
                        # only tie, which matters solely for enumeration
                        # order; skip unless this branch can still
                        # lexicographically precede the incumbent.
                        if best_tuple is not None:
                            if rooting:
                                cand = prefix + (pids_s[c],)
                                head = best_tuple[: len(cand)]
                                if cand > head or (cand == head and len(cand) == n_rob):
                                    stats.children_pruned += 1
                                    continue
                            elif prefix >= best_tuple:
                                stats.children_pruned += 1
                                continue
            targ[j] = c
            new_prefix = prefix + (pids_s[c],) if rooting else prefix
            fin = rowj[c] + insp_s[c]
            dc = dpp_s[c]
            row = [fin + dc[l] / vj for l in range(na)]
            row[c] = rowj[c]
            arr[j] = row
            assign(seg, targ, prx, pry, arr, accrued, reveals, new_prefix)
            arr[j] = rowj  # free robots carry their direct travel row
            targ[j] = -1

    def advance(seg, targ, prx, pry, accrued, reveals, prefix):
        nonlocal best_cost, best_tuple
        pids_s, xs_s, ys_s, insp_s, lik_s, dpp_s, trow_s, sum_ir, psum, floor = seg
        stats.nodes_expanded += 1

        duration = math.inf
        winner = -1
        tts_c = [0.0] * n_rob
        for r in rng_rob:
            g = targ[r]
            dx = prx[r] - xs_s[g]
            dy = pry[r] - ys_s[g]
            tt = math.sqrt(dx * dx + dy * dy) / spd0[r]
            tts_c[r] = tt
            fin = tt + insp_s[g]
            if fin < duration or (
                fin == duration and (pids_s[g], r) < (pids_s[targ[winner]], winner)
            ):
                duration = fin
                winner = r
        g_win = targ[winner]

        acc2 = accrued + k_rate * duration * psum

        nprx = prx[:]
        npry = pry[:]
        for r in rng_rob:
            tt = tts_c[r]
            frac = 0.0 if tt == 0.0 else min(duration, tt) / tt
            g = targ[r]
            nprx[r] = prx[r] + frac * (xs_s[g] - prx[r])
            npry[r] = pry[r] + frac * (ys_s[g] - pry[r])

        reveals2 = reveals + 1
        a2 = len(pids_s) - 1

        if a2 == 0 or reveals2 >= cap:
            value = acc2
            if a2:
                # Tail on label-sorted robots: leaf values must not depend
                # on robot labeling or the ascending-target reduction for
                # identical robots would change the returned cost.
                order = sorted(rng_rob, key=lambda r: (nprx[r], npry[r], spd0[r]))
                value += _tail(
                    [pids_s[g] for g in range(a2 + 1) if g != g_win],
                    [xs_s[g] for g in range(a2 + 1) if g != g_win],
                    [ys_s[g] for g in range(a2 + 1) if g != g_win],
                    [insp_s[g] for g in range(a2 + 1) if g != g_win],
                    [lik_s[g] for g in range(a2 + 1) if g != g_win],
                    [nprx[r] for r in order],
                    [npry[r] for r in order],
                    [spd0[r] for r in order],
                    k_rate,
                )
            leaf_update(value, prefix)
            return

        keep = [g for g in range(a2 + 1) if g != g_win]
        pids2 = [pids_s[g] for g in keep]
        xs2 = [xs_s[g] for g in keep]
        ys2 = [ys_s[g] for g in keep]
        insp2 = [insp_s[g] for g in keep]
        lik2 = [lik_s[g] for g in keep]
        dpp2 = [[dpp_s[p][q] for q in keep] for p in keep]
        trow2 = []
        for r in rng_rob:
            x = nprx[r]
            y = npry[r]
            v = spd0[r]
            row = [0.0] * a2
            for g in range(a2):
                dx = x - xs2[g]
                dy = y - ys2[g]
                row[g] = math.sqrt(dx * dx + dy * dy) / v
            trow2.append(row)
        seg2 = make_seg(pids2, xs2, ys2, insp2, lik2, dpp2, trow2)
        sum_ir2 = seg2[7]
        floor2 = seg2[9]

        targ2 = [-1] * n_rob
        arr2 = list(trow2)
        for r in rng_rob:
            t = targ[r]
            if t == g_win:
                continue
            t2 = t - 1 if t > g_win else t
            targ2[r] = t2
            vr = spd0[r]
            fin = trow2[r][t2] + insp2[t2]
            dt = dpp2[t2]
            row = [fin + dt[l] / vr for l in range(a2)]
            row[t2] = trow2[r][t2]
            arr2[r] = row

        if node_log is not None:
            s = 0.0
            for l in range(a2):
                m = trow2[0][l]
                for r in range(1, n_rob):
                    f = trow2[r][l]
                    if f < m:
                        m = f
                s += lik2[l] * (m + insp2[l])
            node_log.append(
                NodeRecord(
                    poi_ids=tuple(pids2),
                    robot_xy=tuple((nprx[r], npry[r]) for r in rng_rob),
                    robot_speeds=tuple(spd0),
                    accrued=acc2,
                    bound=acc2 + k_rate * s,
                )
            )

        if do_prune:
            # Commitment-aware arrivals are only admissible while targets
            # stay singly claimed below this node; otherwise bound on
            # positions alone.
            rl2 = cap - reveals2
            if rl2 > a2:
                rl2 = a2
            rows = arr2 if a2 - rl2 >= n_rob else trow2
            s = 0.0
            for l in range(a2):
                m = rows[0][l]
                for r in range(1, n_rob):
                    f = rows[r][l]
                    if f < m:
                        m = f
                s += lik2[l] * m
            t = sum_ir2 + s
            if t < floor2:
                t = floor2
            nb = acc2 + k_rate * t
            if slack > 0.0:
                if nb >= best_cost - slack:
                    return
            else:
                if nb > best_cost + 1e-9 * (abs(best_cost) + 1.0):
                    return
                if (
                    nb == best_cost
                    and nb == acc2
                    and best_tuple is not None
                    and prefix >= best_tuple
                ):
                    return

        assign(seg2, targ2, nprx, npry, arr2, acc2, reveals2, prefix)

    trow0 = []
    for r in rng_rob:
        x = rx0[r]
        y = ry0[r]
        v = spd0[r]
        row = [0.0] * n
        for g in range(n):
            dx = x - xs0[g]
            dy = y - ys0[g]
            row[g] = math.sqrt(dx * dx + dy * dy) / v
        trow0.append(row)
    if node_log is not None:
        s = 0.0
        for l in range(n):
            m = trow0[0][l]
            for r in range(1, n_rob):
                f = trow0[r][l]
                if f < m:
                    m = f
            s += lik0[l] * (m + insp0[l])
        node_log.append(
            NodeRecord(
                poi_ids=tuple(pids0),
                robot_xy=tuple((rx0[r], ry0[r]) for r in rng_rob),
                robot_speeds=tuple(spd0),
                accrued=0.0,
                bound=k_rate * s,
            )
        )
    seg0 = make_seg(pids0, xs0, ys0, insp0, lik0, dpp0, trow0)

    # No incumbent seeding: children are visited in bound order, so the
    # first descent already lands on a realized route and every later
    # node prunes against an achievable cost.
    assign(seg0, [-1] * n_rob, rx0[:], ry0[:], list(trow0), 0.0, 0, ())
    assert best_tuple is not None
    return best_cost, best_tuple


def _state_arrays(state: PlanningState):
    return (
        np.asarray(state.poi_ids, dtype=np.int64),
        state.poi_xy.astype(float, copy=False),
        state.inspect_times.astype(float, copy=False),
        state.likelihoods.astype(float, copy=False),
        state.robot_xy.astype(float, copy=False),
        state.robot_speeds.astype(float, copy=False),
    )


def expected_cost(
    state: PlanningState,
    config: PlannerConfig,
    node_log: Optional[List[NodeRecord]] = None,
) -> Tuple[float, JointAction]:
    """Optimal depth-capped expected cost and its first joint action.

    Exact minimum over assignment/reveal sequences whenever
    len(remaining) <= depth_cap; ties go to the first enumerated action.
    """
    config.validate()
    if state.n_pois == 0:
        raise ValueError("empty remaining set")
    ids, xy, insp, lik, rob, spd = _state_arrays(state)
    stats = _SearchStats()
    cost, targets = _search(ids, xy, insp, lik, rob, spd, config, stats, node_log)
    return float(cost), JointAction(targets)


def select_priority_subset(state: PlanningState, config: PlannerConfig) -> Tuple[int, ...]:
    """Priority PoIs: top n_top_prob likelihoods, then nearest-per-robot fill.

    Returns all ids when the remaining set already fits in n_priority.
    Round-robin fill walks robots in index order, each adding its
    nearest unselected PoI, until n_priority distinct ids are chosen.
    """
    config.validate()
    n = state.n_pois
    if n <= config.n_priority:
        return tuple(state.poi_ids)

    by_prob = sorted(range(n), key=lambda j: (-state.likelihoods[j], state.poi_ids[j]))
    chosen: Set[int] = set(by_prob[: config.n_top_prob])

    tt = _travel_matrix(state.robot_xy, state.robot_speeds, state.poi_xy)
    robot = 0
    while len(chosen) < config.n_priority:
        row = tt[robot]
        j_best = -1
        for j in range(n):
            if j in chosen:
                continue
            if j_best < 0 or row[j] < row[j_best]:
                j_best = j
        chosen.add(j_best)
        robot = (robot + 1) % state.n_robots
    return tuple(sorted(state.poi_ids[j] for j in chosen))


def plan(state: PlanningState, config: PlannerConfig) -> JointAction:
    """Receding-horizon step: best joint action on the priority subset."""
    return plan_detailed(state, config).action


def plan_detailed(
    state: PlanningState,
    config: PlannerConfig,
    node_log: Optional[List[NodeRecord]] = None,
) -> PlanResult:
    config.validate()
    if state.n_pois == 0:
        raise ValueError("empty remaining set")
    subset = select_priority_subset(state, config)
    sub = state.subset(subset) if len(subset) < state.n_pois else state
    ids, xy, insp, lik, rob, spd = _state_arrays(sub)
    stats = _SearchStats()
    cost, targets = _search(ids, xy, insp, lik, rob, spd, config, stats, node_log)
    return PlanResult(
        action=JointAction(targets),
        cost=float(cost),
        nodes_expanded=stats.nodes_expanded,
        children_pruned=stats.children_pruned,
        subset_ids=subset,
    )
