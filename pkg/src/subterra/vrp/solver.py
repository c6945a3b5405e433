"""Ruin-and-recreate routing heuristic.

Construction is regret-2 insertion. Improvement cycles through random ruin,
radial ruin and whole-route ruin, recreates greedily in random order and
keeps a candidate only when it is strictly cheaper than the incumbent.
Whole-route ruin is what lets the search drop a vehicle: with
strictly-better acceptance a partial ruin can never empty a route.

Instances made only of untimed services take a vectorised fast path; any
time window or shipment switches to full schedule evaluation per candidate.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .model import (
    Activity,
    Job,
    Matrices,
    Service,
    Shipment,
    Solution,
    SolverParams,
    Tour,
    Vehicle,
    matrix_for,
    timeline,
)

# Most activities a shipment may stay on board between its pickup and delivery
# during insertion; keeps long routes from costing quadratic time per job.
MAX_SPAN = 12
INF = math.inf


class _Route:
    __slots__ = ("v", "acts", "cost", "load", "seq")

    def __init__(self, v, acts, cost=0.0, load=0, seq=None):
        self.v = v
        self.acts = acts
        self.cost = cost
        self.load = load
        self.seq = seq

    def copy(self):
        return _Route(self.v, list(self.acts), self.cost, self.load, self.seq)


class _Instance:
    """Index-based view of a routing problem."""

    def __init__(self, jobs: Sequence[Job], fleet: Sequence[Vehicle], matrix: Matrices,
                 params: SolverParams):
        self.jobs = list(jobs)
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("job ids must be unique")
        vids = [v.id for v in fleet]
        if len(set(vids)) != len(vids):
            raise ValueError("vehicle ids must be unique")
        self.vehicles = list(fleet)
        self.params = params
        self.n = len(self.jobs)
        modes = sorted({v.type.mode for v in self.vehicles})
        self.mats = {m: matrix_for(matrix, m) for m in modes}
        self.T = {m: self.mats[m].seconds.tolist() for m in modes}
        self.D = {m: self.mats[m].meters.tolist() for m in modes}

        self.is_ship = [isinstance(j, Shipment) for j in self.jobs]
        self.size = [j.size for j in self.jobs]
        self.size_arr = np.array(self.size, dtype=float)
        self.timed = any(self.is_ship) or any(
            isinstance(j, Service) and j.window is not None for j in self.jobs)

        # activity codes: 2*j is a service or pickup, 2*j+1 a delivery
        na = 2 * self.n
        self.act_node = {m: [-1] * na for m in modes}
        self.earliest = [-INF] * na
        self.latest = [INF] * na
        self.duration = [0.0] * na
        self.node_name = [None] * na
        for j, job in enumerate(self.jobs):
            if isinstance(job, Shipment):
                pairs = ((2 * j, job.pickup, job.pickup_window, job.pickup_duration),
                         (2 * j + 1, job.delivery, job.delivery_window, job.delivery_duration))
            else:
                pairs = ((2 * j, job.location, job.window, job.duration),)
            for code, node, win, dur in pairs:
                self.node_name[code] = node
                for m in modes:
                    self.act_node[m][code] = self.mats[m].index.get(node, -1)
                if win is not None:
                    self.earliest[code] = win.earliest
                    self.latest[code] = win.latest
                self.duration[code] = float(dur)
        self.loc = {m: np.array([self.act_node[m][2 * j] for j in range(self.n)], dtype=int)
                    for m in modes}
        self.dur_arr = np.array([self.duration[2 * j] for j in range(self.n)])

        self.start_idx = []
        for v in self.vehicles:
            idx = self.mats[v.type.mode].index.get(v.start)
            if idx is None:
                raise KeyError(f"vehicle {v.id} start {v.start!r} missing from matrix")
            self.start_idx.append(idx)

        self.compat = np.zeros((self.n, len(self.vehicles)), dtype=bool)
        for vi, v in enumerate(self.vehicles):
            vt = v.type
            for j, job in enumerate(self.jobs):
                if job.allowed_types is not None and vt.name not in job.allowed_types:
                    continue
                if job.size > vt.capacity:
                    continue
                codes = (2 * j, 2 * j + 1) if self.is_ship[j] else (2 * j,)
                if any(self.act_node[vt.mode][c] < 0 for c in codes):
                    continue
                self.compat[j, vi] = True

        # vehicles interchangeable for cost purposes share a class
        classes: dict[tuple, list[int]] = {}
        for vi, v in enumerate(self.vehicles):
            key = (v.type, v.start, v.earliest_start) if self.timed else (v.type, v.start)
            classes.setdefault(key, []).append(vi)
        self.classes = list(classes.values())
        self.class_of = [0] * len(self.vehicles)
        for k, members in enumerate(self.classes):
            for vi in members:
                self.class_of[vi] = k

        self.reasons: dict[int, str] = {}
        for j, job in enumerate(self.jobs):
            if not self.compat[j].any():
                if all(job.size > v.type.capacity for v in self.vehicles):
                    self.reasons[j] = "size exceeds capacity of every vehicle"
                else:
                    self.reasons[j] = "no compatible vehicle"

    # -- evaluation -------------------------------------------------------

    def codes(self, j: int) -> list[int]:
        return [2 * j, 2 * j + 1] if self.is_ship[j] else [2 * j]

    def load_profile(self, acts: Sequence[int]) -> tuple[int, list[int]]:
        size = self.size
        load = sum(size[c >> 1] for c in acts if not self.is_ship[c >> 1])
        start = load
        after = []
        for c in acts:
            j = c >> 1
            if self.is_ship[j] and not c & 1:
                load += size[j]
            else:
                load -= size[j]
            after.append(load)
        return start, after

    def schedule(self, v: int, acts: Sequence[int]):
        veh = self.vehicles[v]
        mode = veh.type.mode
        T = self.T[mode]
        node = self.act_node[mode]
        s = self.start_idx[v]
        seq = [s] + [node[c] for c in acts] + [s]
        travel = [T[a][b] for a, b in zip(seq, seq[1:])]
        return timeline(veh.earliest_start, travel,
                        [self.earliest[c] for c in acts],
                        [self.latest[c] for c in acts],
                        [self.duration[c] for c in acts]), seq

    def eval(self, v: int, acts: Sequence[int]) -> float:
        """Cost of vehicle ``v`` serving ``acts``; inf when over capacity."""
        if not acts:
            return 0.0
        vt = self.vehicles[v].type
        start, after = self.load_profile(acts)
        if start > vt.capacity or max(after) > vt.capacity:
            return INF
        state = self.advance(v, self.origin(v), acts)
        return self.close(v, state)

    # A partial schedule is (node, time, meters, waited, shift, late). Shifting
    # the start by ``shift`` never changes lateness or the end time, so the
    # cost follows from one forward pass; see ``timeline``.

    def origin(self, v: int):
        return (self.start_idx[v], self.vehicles[v].earliest_start, 0.0, 0.0, INF, 0.0)

    def advance(self, v: int, state, acts: Sequence[int]):
        mode = self.vehicles[v].type.mode
        T, D, node = self.T[mode], self.D[mode], self.act_node[mode]
        earliest, latest, duration = self.earliest, self.latest, self.duration
        at, t, m, w, sh, late = state
        for c in acts:
            nxt = node[c]
            t += T[at][nxt]
            m += D[at][nxt]
            at = nxt
            e = earliest[c]
            if t < e:
                w += e - t
                t = e
            lt = latest[c]
            if lt != INF:
                if t > lt:
                    late += t - lt
                    x = w
                else:
                    x = w + (lt - t)
                if x < sh:
                    sh = x
            t += duration[c]
        return (at, t, m, w, sh, late)

    def splice(self, v: int, acts: Sequence[int]):
        """Prefix states of ``acts`` and a function costing ``state`` + ``acts[q:]``.

        The returned ``finish(state, q)`` prices the unchanged tail in time
        linear in its windowed stops instead of replaying it. Arriving at the
        tail ``delta`` seconds later than before delays stop ``k`` by
        ``max(0, delta - waits in between)``; waiting, lateness, end time and
        the start shift all follow in closed form. A negative delay (only
        possible when travel times break the triangle inequality) falls back
        to a replay.
        """
        vt = self.vehicles[v].type
        mode = vt.mode
        T, D, node = self.T[mode], self.D[mode], self.act_node[mode]
        earliest, latest, duration = self.earliest, self.latest, self.duration
        home = self.start_idx[v]
        es = self.vehicles[v].earliest_start
        m = len(acts)
        pre = [self.origin(v)]
        arr, waited_before, gap = [], [], []
        at, t, w = home, es, 0.0
        late_at = []
        for c in acts:
            nxt = node[c]
            t += T[at][nxt]
            at = nxt
            arr.append(t)
            waited_before.append(w)
            e = earliest[c]
            if t < e:
                w += e - t
                t = e
            lt = latest[c]
            if lt != INF:
                gap.append(w + (lt - t if lt > t else 0.0))
                late_at.append(t - lt if t > lt else 0.0)
            else:
                gap.append(None)
                late_at.append(0.0)
            t += duration[c]
            pre.append(self.advance(v, pre[-1], (c,)))
        end_old = t + T[at][home]
        w_total = w
        # suffix aggregates
        tail_m = [0.0] * (m + 1)
        tail_late = [0.0] * (m + 1)
        min_g = [INF] * (m + 1)
        gs: list[tuple] = [()] * (m + 1)
        tail_m[m] = 0.0
        for k in range(m - 1, -1, -1):
            nxt_node = node[acts[k + 1]] if k + 1 < m else home
            tail_m[k] = tail_m[k + 1] + D[node[acts[k]]][nxt_node]
            tail_late[k] = tail_late[k + 1] + late_at[k]
            g = gap[k]
            if g is not None:
                min_g[k] = g if g < min_g[k + 1] else min_g[k + 1]
                gs[k] = (g,) + gs[k + 1]
            else:
                min_g[k] = min_g[k + 1]
                gs[k] = gs[k + 1]
        fixed, cpm, cps = vt.fixed_cost, vt.cost_per_meter, vt.cost_per_second
        rate = self.params.window_penalty
        close, advance = self.close, self.advance

        def finish(state, q: int) -> float:
            if q == m:
                return close(v, state)
            at_, t_, m_, w_, sh, late = state
            nq = node[acts[q]]
            aq = t_ + T[at_][nq]
            delta = aq - arr[q]
            if delta < 0:
                return close(v, advance(v, state, acts[q:]))
            y = delta + waited_before[q]
            for g in gs[q]:
                if g < y:
                    late += y - g
            late += tail_late[q]
            slack = w_total - waited_before[q]
            end = end_old + (delta - slack if delta > slack else 0.0)
            wt = w_ + (slack - delta if slack > delta else 0.0)
            mg = min_g[q]
            if mg != INF:
                x = mg - ((aq - w_) - (arr[q] - waited_before[q]))
                if x < w_:
                    x = w_
                if x < sh:
                    sh = x
            shift = sh if sh < wt else wt
            meters = m_ + D[at_][nq] + tail_m[q]
            return fixed + cpm * meters + cps * (end - es - shift) + rate * late

        return pre, finish

    def close(self, v: int, state) -> float:
        vt = self.vehicles[v].type
        at, t, m, w, sh, late = state
        home = self.start_idx[v]
        end = t + self.T[vt.mode][at][home]
        m += self.D[vt.mode][at][home]
        shift = sh if sh < w else w
        t0 = self.vehicles[v].earliest_start + shift
        return (vt.fixed_cost + vt.cost_per_meter * m + vt.cost_per_second * (end - t0)
                + self.params.window_penalty * late)

    def fast_cost(self, v: int, seq: np.ndarray, jobs_in: Sequence[int]) -> float:
        if not jobs_in:
            return 0.0
        vt = self.vehicles[v].type
        mat = self.mats[vt.mode]
        meters = float(mat.meters[seq[:-1], seq[1:]].sum())
        secs = float(mat.seconds[seq[:-1], seq[1:]].sum()) + float(self.dur_arr[list(jobs_in)].sum())
        return vt.fixed_cost + vt.cost_per_meter * meters + vt.cost_per_second * secs

    def open_cost(self, j: int, v: int) -> float:
        if not self.compat[j, v]:
            return INF
        return self.eval(v, self.codes(j))


class _Search:
    def __init__(self, inst: _Instance, rng: np.random.Generator):
        self.inst = inst
        self.rng = rng
        self.routes: dict[int, _Route] = {}
        self.unassigned: set[int] = set()
        nv = len(inst.vehicles)
        nk = len(inst.classes)
        # opening costs depend only on (job, class)
        self.open = np.full((inst.n, nk), INF)
        for k, members in enumerate(inst.classes):
            rep = members[0]
            for j in range(inst.n):
                self.open[j, k] = inst.open_cost(j, rep)
        self.nv, self.nk = nv, nk

    def copy(self) -> "_Search":
        other = object.__new__(_Search)
        other.inst = self.inst
        other.rng = self.rng
        other.open = self.open
        other.nv, other.nk = self.nv, self.nk
        other.routes = {v: r.copy() for v, r in self.routes.items()}
        other.unassigned = set(self.unassigned)
        return other

    @property
    def cost(self) -> float:
        inst = self.inst
        missing = len(self.unassigned) + len(inst.reasons)
        return sum(r.cost for r in self.routes.values()) + inst.params.unassigned_penalty * missing

    def free_vehicle(self, k: int) -> int | None:
        for vi in self.inst.classes[k]:
            if vi not in self.routes:
                return vi
        return None

    # -- insertion costs --------------------------------------------------

    def column(self, v: int, jobs: Sequence[int]):
        """Best insertion of each job into the route of vehicle ``v``.

        Returns costs (inf if infeasible) and per-job placements.
        """
        inst = self.inst
        route = self.routes[v]
        vt = inst.vehicles[v].type
        jobs = np.asarray(jobs, dtype=int)
        if not inst.timed:
            mat = inst.mats[vt.mode]
            L = inst.loc[vt.mode][jobs]
            a, b = route.seq[:-1], route.seq[1:]
            Lc = np.where(L < 0, 0, L)
            dt = mat.seconds[a][:, Lc].T + mat.seconds[Lc][:, b] - mat.seconds[a, b]
            dm = mat.meters[a][:, Lc].T + mat.meters[Lc][:, b] - mat.meters[a, b]
            c = vt.cost_per_meter * dm + vt.cost_per_second * dt
            pos = np.argmin(c, axis=1)
            best = c[np.arange(len(jobs)), pos] + vt.cost_per_second * inst.dur_arr[jobs]
            ok = inst.compat[jobs, v] & (route.load + inst.size_arr[jobs] <= vt.capacity)
            return np.where(ok, best, INF), pos
        costs = np.full(len(jobs), INF)
        placements = [None] * len(jobs)
        spliced = None
        for i, j in enumerate(jobs):
            if inst.compat[j, v]:
                if spliced is None:
                    spliced = inst.splice(v, route.acts)
                costs[i], placements[i] = self.generic_best(route, int(j), spliced)
        return costs, placements

    def generic_best(self, route: _Route, j: int, spliced=None):
        inst = self.inst
        v = route.v
        cap = inst.vehicles[v].type.capacity
        acts = route.acts
        m = len(acts)
        s = inst.size[j]
        start, after = inst.load_profile(acts)
        base = route.cost
        advance = inst.advance
        rate = inst.params.window_penalty
        pre, finish = spliced or inst.splice(v, acts)
        best, where = INF, None
        if not inst.is_ship[j]:
            code = 2 * j
            if start + s > cap:
                return INF, None
            peak = start
            for p in range(m + 1):
                if p > 0:
                    peak = max(peak, after[p - 1])
                    if peak + s > cap:
                        break
                st = advance(v, pre[p], (code,))
                # lateness at the new stop only grows with later positions
                gain = st[5] - pre[p][5]
                if gain > 0 and rate * gain >= best:
                    break
                c = finish(st, p) - base
                if c < best:
                    best, where = c, (p,)
            if where is None:
                return INF, None
            p = where[0]
            return best, acts[:p] + [code] + acts[p:]
        pu, de = 2 * j, 2 * j + 1
        stop = False
        for i in range(m + 1):
            before = start if i == 0 else after[i - 1]
            if before + s > cap:
                continue
            peak = before
            mid = advance(v, pre[i], (pu,))
            for q in range(i, min(m, i + MAX_SPAN) + 1):
                if q > i:
                    peak = max(peak, after[q - 1])
                    if peak + s > cap:
                        break
                    mid = advance(v, mid, (acts[q - 1],))
                st = advance(v, mid, (de,))
                gain = st[5] - mid[5]
                if gain > 0 and rate * gain >= best:
                    if q == i:
                        stop = True
                    break
                c = finish(st, q) - base
                if c < best:
                    best, where = c, (i, q)
            if stop:
                break
        if where is None:
            return INF, None
        i, q = where
        return best, acts[:i] + [pu] + acts[i:q] + [de] + acts[q:]

    # -- mutation ---------------------------------------------------------

    def place(self, j: int, v: int, placement) -> None:
        inst = self.inst
        route = self.routes.get(v)
        if route is None:
            route = _Route(v, [])
            route.seq = np.array([inst.start_idx[v]] * 2, dtype=int)
            self.routes[v] = route
        if inst.timed:
            route.acts = placement if placement is not None else inst.codes(j)
            route.cost = inst.eval(v, route.acts)
        else:
            pos = 0 if placement is None else int(placement)
            route.acts.insert(pos, j)
            mode = inst.vehicles[v].type.mode
            route.seq = np.insert(route.seq, pos + 1, inst.loc[mode][j])
            route.load += inst.size[j]
            route.cost = inst.fast_cost(v, route.seq, route.acts)
        self.unassigned.discard(j)

    def remove(self, jobs: Sequence[int]) -> None:
        inst = self.inst
        drop = set(jobs)
        touched = set()
        for v, route in self.routes.items():
            if inst.timed:
                kept = [c for c in route.acts if (c >> 1) not in drop]
            else:
                kept = [j for j in route.acts if j not in drop]
            if len(kept) != len(route.acts):
                route.acts = kept
                touched.add(v)
        for v in touched:
            route = self.routes[v]
            if not route.acts:
                del self.routes[v]
                continue
            if inst.timed:
                route.cost = inst.eval(v, route.acts)
            else:
                mode = inst.vehicles[v].type.mode
                s = inst.start_idx[v]
                route.seq = np.array([s] + [int(inst.loc[mode][j]) for j in route.acts] + [s], dtype=int)
                route.load = sum(inst.size[j] for j in route.acts)
                route.cost = inst.fast_cost(v, route.seq, route.acts)
        self.unassigned |= drop

    def assigned(self) -> list[int]:
        inst = self.inst
        out = []
        for route in self.routes.values():
            if inst.timed:
                out.extend(c >> 1 for c in route.acts if not c & 1)
            else:
                out.extend(route.acts)
        return sorted(out)

    # -- insertion driver -------------------------------------------------

    def insert_all(self, jobs: Sequence[int], regret: bool) -> None:
        """Insert ``jobs`` by regret-2 or, if ``regret`` is False, in the given order."""
        inst = self.inst
        todo = list(jobs)
        if not todo:
            return
        nv, nk = self.nv, self.nk
        row = {j: i for i, j in enumerate(todo)}
        C = np.full((len(todo), nv + nk), INF)
        P: dict[tuple[int, int], object] = {}
        idx = np.array(todo, dtype=int)

        def refresh(v):
            costs, placements = self.column(v, idx_alive())
            alive = idx_alive()
            C[[row[j] for j in alive], v] = costs
            for j, pl in zip(alive, placements):
                P[(j, v)] = pl

        alive_set = set(todo)

        def idx_alive():
            return [j for j in todo if j in alive_set]

        for v in self.routes:
            refresh(v)
        for k in range(nk):
            fv = self.free_vehicle(k)
            if fv is not None:
                C[:, nv + k] = self.open[idx, k]

        pending = list(todo)
        while pending:
            if regret:
                rows = np.array([row[j] for j in pending])
                sub = C[rows]
                best = sub.min(axis=1)
                if sub.shape[1] > 1:
                    second = np.partition(sub, 1, axis=1)[:, 1]
                else:
                    second = np.full(len(rows), INF)
                feasible = np.isfinite(best)
                if not feasible.any():
                    break
                with np.errstate(invalid="ignore"):
                    reg = np.where(np.isfinite(second), second - best, INF)
                reg = np.where(feasible, reg, -INF)
                # max regret, then cheapest, then lowest job index
                order = np.lexsort((np.array(pending), best, -reg))
                j = pending[order[0]]
            else:
                j = pending[0]
                if not np.isfinite(C[row[j]]).any():
                    pending.pop(0)
                    alive_set.discard(j)
                    self.unassigned.add(j)
                    continue
            r = row[j]
            col = int(np.argmin(C[r]))
            pending.remove(j)
            alive_set.discard(j)
            if col < nv:
                v = col
                self.place(j, v, P[(j, v)])
                opened_class = None
            else:
                k = col - nv
                v = self.free_vehicle(k)
                self.place(j, v, None)
                opened_class = k
            if alive_set:
                refresh(v)
            if opened_class is not None and self.free_vehicle(opened_class) is None:
                C[:, nv + opened_class] = INF
        for j in pending:
            self.unassigned.add(j)

    # -- ruin -------------------------------------------------------------

    def ruin_random(self, count: int) -> list[int]:
        pool = self.assigned()
        if not pool:
            return []
        count = min(count, len(pool))
        pick = self.rng.choice(len(pool), size=count, replace=False)
        return sorted(pool[i] for i in pick)

    def ruin_route(self) -> list[int]:
        if not self.routes:
            return []
        vs = sorted(self.routes)
        v = vs[int(self.rng.integers(len(vs)))]
        acts = self.routes[v].acts
        if self.inst.timed:
            return sorted({c >> 1 for c in acts})
        return sorted(acts)

    def ruin_radial(self, count: int, dist: np.ndarray) -> list[int]:
        pool = self.assigned()
        if not pool:
            return []
        count = min(count, len(pool))
        seed = pool[int(self.rng.integers(len(pool)))]
        arr = np.array(pool)
        d = dist[seed, arr]
        order = np.lexsort((arr, d))
        return sorted(int(x) for x in arr[order[:count]])


def _anchor_distances(inst: _Instance) -> np.ndarray:
    mode = inst.vehicles[0].type.mode if inst.vehicles else next(iter(inst.mats))
    mat = inst.mats[mode]
    anchors = []
    for j in range(inst.n):
        code = 2 * j + 1 if inst.is_ship[j] else 2 * j
        anchors.append(inst.act_node[mode][code])
    anchors = np.array(anchors, dtype=int)
    dist = np.full((inst.n, inst.n), INF)
    ok = anchors >= 0
    if ok.any():
        sub = mat.seconds[np.ix_(anchors[ok], anchors[ok])]
        sub = np.minimum(sub, sub.T)
        dist[np.ix_(ok, ok)] = sub
    np.fill_diagonal(dist, 0.0)
    return dist


def _to_solution(inst: _Instance, routes: dict[int, _Route]) -> Solution:
    tours = []
    total = 0.0
    penalty = 0.0
    for v in sorted(routes):
        route = routes[v]
        veh = inst.vehicles[v]
        codes = route.acts if inst.timed else [2 * j for j in route.acts]
        (t0, arrivals, begins, end, late), _ = inst.schedule(v, codes)
        start_load, after = inst.load_profile(codes)
        acts = [Activity("start", None, veh.start, t0, t0, t0, start_load)]
        for c, arr, beg, load in zip(codes, arrivals, begins, after):
            j = c >> 1
            job = inst.jobs[j]
            if inst.is_ship[j]:
                kind = "delivery" if c & 1 else "pickup"
                win = job.delivery_window if c & 1 else job.pickup_window
            else:
                kind, win = "service", job.window
            acts.append(Activity(kind, job.id, inst.node_name[c], arr, beg,
                                 beg + inst.duration[c], load, win))
        acts.append(Activity("end", None, veh.start, end, end, end, after[-1] if after else start_load))
        tours.append(Tour(veh.id, veh, tuple(acts)))
        total += inst.eval(v, codes)
        penalty += inst.params.window_penalty * late
    return Solution(tours=tours, total_cost=total, penalty_cost=penalty)


def _finish(inst: _Instance, search: _Search) -> Solution:
    sol = _to_solution(inst, search.routes)
    unassigned = {inst.jobs[j].id: r for j, r in inst.reasons.items()}
    for j in sorted(search.unassigned):
        unassigned[inst.jobs[j].id] = "no feasible insertion with remaining fleet"
    sol.unassigned = dict(sorted(unassigned.items()))
    extra = inst.params.unassigned_penalty * len(sol.unassigned)
    sol.total_cost += extra
    sol.penalty_cost += extra
    return sol


def construct(jobs: Sequence[Job], fleet: Sequence[Vehicle], matrix: Matrices,
              params: SolverParams = SolverParams()) -> Solution:
    """Regret-2 construction only, without improvement."""
    inst = _Instance(jobs, fleet, matrix, params)
    search = _Search(inst, np.random.default_rng(params.seed))
    search.insert_all([j for j in range(inst.n) if j not in inst.reasons], regret=True)
    return _finish(inst, search)


def solve(jobs: Sequence[Job], fleet: Sequence[Vehicle], matrix: Matrices,
          params: SolverParams = SolverParams()) -> Solution:
    """Route ``jobs`` with ``fleet``; deterministic for a given ``params.seed``.

    Capacity and pickup-before-delivery are hard constraints. Time windows
    are soft and charged ``params.window_penalty`` per second late. Jobs no
    vehicle can carry are reported in ``Solution.unassigned`` with a reason.
    """
    inst = _Instance(jobs, fleet, matrix, params)
    rng = np.random.default_rng(params.seed)
    search = _Search(inst, rng)
    assignable = [j for j in range(inst.n) if j not in inst.reasons]
    search.insert_all(assignable, regret=True)
    if not assignable:
        return _finish(inst, search)

    dist = _anchor_distances(inst)
    count = max(1, math.ceil(params.ruin_fraction * len(assignable)))
    best = search
    best_cost = best.cost
    for it in range(params.iterations):
        cand = best.copy()
        step = it % 3
        if step == 0:
            removed = cand.ruin_random(count)
        elif step == 1:
            removed = cand.ruin_radial(count, dist)
        else:
            removed = cand.ruin_route()
        cand.remove(removed)
        todo = sorted(cand.unassigned)
        order = rng.permutation(len(todo))
        cand.unassigned = set()
        cand.insert_all([todo[i] for i in order], regret=False)
        c = cand.cost
        if c < best_cost - 1e-9 * max(1.0, abs(best_cost)):
            best, best_cost = cand, c
    return _finish(inst, best)
