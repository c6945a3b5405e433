"""Exhaustive solver for desk-scale instances, used as a test oracle."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .model import Job, Matrices, Solution, SolverParams, Vehicle, timeline
from .solver import INF, _finish, _Instance, _Route, _Search

MAX_JOBS = 8


def _evaluator(inst: _Instance, vi: int):
    """Cost of one activity ordering for vehicle ``vi``; mirrors ``_Instance.eval``."""
    veh = inst.vehicles[vi]
    vt = veh.type
    T, D = inst.T[vt.mode], inst.D[vt.mode]
    node = inst.act_node[vt.mode]
    s0 = inst.start_idx[vi]
    cap = vt.capacity
    earliest, latest, duration = inst.earliest, inst.latest, inst.duration
    size, is_ship = inst.size, inst.is_ship
    rate = inst.params.window_penalty

    def cost(acts) -> float:
        load = sum(size[c >> 1] for c in acts if not is_ship[c >> 1])
        if load > cap:
            return INF
        for c in acts:
            j = c >> 1
            load += size[j] if is_ship[j] and not c & 1 else -size[j]
            if load > cap:
                return INF
        travel = []
        meters = 0.0
        prev = s0
        for c in acts:
            cur = node[c]
            travel.append(T[prev][cur])
            meters += D[prev][cur]
            prev = cur
        travel.append(T[prev][s0])
        meters += D[prev][s0]
        t0, _, _, end, late = timeline(veh.earliest_start, travel,
                                       [earliest[c] for c in acts],
                                       [latest[c] for c in acts],
                                       [duration[c] for c in acts])
        return (vt.fixed_cost + vt.cost_per_meter * meters + vt.cost_per_second * (end - t0)
                + rate * late)

    return cost


def _best_order(inst: _Instance, vi: int, jobs: Sequence[int], cost) -> tuple[float, list[int] | None]:
    """Cheapest ordering of ``jobs`` on vehicle ``vi`` by depth-first branch and bound.

    The bound adds fixed cost, distance and travel-plus-service time so far
    and lateness so far. Lateness of the unshifted schedule equals that of
    the final one and tour time never undercuts travel plus service time, so
    the bound never exceeds the true cost of any completion.
    """
    vt = inst.vehicles[vi].type
    T, D = inst.T[vt.mode], inst.D[vt.mode]
    node = inst.act_node[vt.mode]
    earliest, latest, duration = inst.earliest, inst.latest, inst.duration
    size, is_ship = inst.size, inst.is_ship
    cap, rate = vt.capacity, inst.params.window_penalty
    cpm, cps, fixed = vt.cost_per_meter, vt.cost_per_second, vt.fixed_cost
    codes = [c for j in jobs for c in inst.codes(j)]
    load0 = sum(size[j] for j in jobs if not is_ship[j])
    if load0 > cap:
        return INF, None
    best = [INF, None]

    def rec(prefix, prev, t, meters, busy, late, load, remaining):
        if not remaining:
            c = cost(prefix)
            if c < best[0]:
                best[0], best[1] = c, list(prefix)
            return
        for c in sorted(remaining, key=lambda c: (T[prev][node[c]], c)):
            if c & 1 and (c - 1) in remaining:
                continue
            j = c >> 1
            nl = load + size[j] if is_ship[j] and not c & 1 else load - size[j]
            if nl > cap:
                continue
            tt = T[prev][node[c]]
            nt = t + tt
            if nt < earliest[c]:
                nt = earliest[c]
            nlate = late + (nt - latest[c] if nt > latest[c] else 0.0)
            nmeters = meters + D[prev][node[c]]
            nbusy = busy + tt + duration[c]
            if fixed + cpm * nmeters + cps * nbusy + rate * nlate >= best[0]:
                continue
            prefix.append(c)
            rec(prefix, node[c], nt + duration[c], nmeters, nbusy, nlate, nl, remaining - {c})
            prefix.pop()

    rec([], inst.start_idx[vi], inst.vehicles[vi].earliest_start, 0.0, 0.0, 0.0, load0,
        frozenset(codes))
    return best[0], best[1]


def brute_force(jobs: Sequence[Job], fleet: Sequence[Vehicle], matrix: Matrices,
                params: SolverParams = SolverParams()) -> Solution:
    """Provably cheapest solution by enumerating job partitions and orderings.

    Leaving a job unassigned is allowed at the unassigned penalty, so the
    result is the true minimum of the same objective ``solve`` optimises.

    Raises:
        ValueError: more than ``MAX_JOBS`` jobs.
    """
    if len(jobs) > MAX_JOBS:
        raise ValueError(f"brute_force handles at most {MAX_JOBS} jobs, got {len(jobs)}")
    inst = _Instance(jobs, fleet, matrix, params)
    n = inst.n
    pool = [j for j in range(n) if j not in inst.reasons]

    # cheapest ordering per (vehicle class, job subset)
    best_route: dict[tuple, tuple[float, list[int] | None]] = {}
    done = set()
    for vi, veh in enumerate(inst.vehicles):
        key = (veh.type, veh.start, veh.earliest_start)
        if key in done:
            continue
        done.add(key)
        cost = _evaluator(inst, vi)
        for r in range(1, len(pool) + 1):
            for subset in itertools.combinations(pool, r):
                if not all(inst.compat[j, vi] for j in subset):
                    continue
                mask = sum(1 << j for j in subset)
                best = _best_order(inst, vi, subset, cost)
                if best[1] is not None:
                    best_route[(key, mask)] = best

    # combine vehicles over disjoint subsets
    states: dict[int, tuple[float, tuple]] = {0: (0.0, ())}
    for vi, veh in enumerate(inst.vehicles):
        key = (veh.type, veh.start, veh.earliest_start)
        nxt = dict(states)
        for used, (cost, plan) in states.items():
            free = [j for j in pool if not used >> j & 1]
            for r in range(1, len(free) + 1):
                for subset in itertools.combinations(free, r):
                    mask = sum(1 << j for j in subset)
                    hit = best_route.get((key, mask))
                    if hit is None:
                        continue
                    total = cost + hit[0]
                    cur = nxt.get(used | mask)
                    if cur is None or total < cur[0] - 1e-12:
                        nxt[used | mask] = (total, plan + ((vi, hit[1]),))
        states = nxt

    penalty = params.unassigned_penalty
    winner = min(states.items(),
                 key=lambda kv: (kv[1][0] + penalty * (len(pool) - bin(kv[0]).count("1")), kv[0]))
    used, (_, plan) = winner

    search = _Search.__new__(_Search)
    search.inst = inst
    search.routes = {}
    for vi, acts in plan:
        if inst.timed:
            route = _Route(vi, list(acts))
        else:
            route = _Route(vi, [c >> 1 for c in acts])
            route.seq = np.array([], dtype=int)
        search.routes[vi] = route
    search.unassigned = {j for j in pool if not used >> j & 1}
    return _finish(inst, search)
