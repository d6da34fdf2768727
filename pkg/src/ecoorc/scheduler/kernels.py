"""Numeric kernels for one scheduling round.

Both kernels work on integer (quantized) costs so that equal-cost
alternatives compare exactly equal and the tie-break is reproducible.

Network used by :func:`ssp_assign`::

    job j --(cap 1, cost q[j,d])--> dc d --(cap S_d, cost 0)--> sink

In incoming-capacity mode a job's arc to its own previous data center goes
straight to the sink, so staying put does not use that data center's
capacity. Jobs are augmented one at a time in priority order; a job with no
augmenting path is left unrouted.
"""

import numpy as np

from .._jit import njit

INF = np.int64(4611686018427387904)  # 2**62

OK = 0
DEPLOYED_UNROUTABLE = 1


@njit
def _build_network(qcost, feasible, prev, cap, incoming):
    n, m = qcost.shape
    n_nodes = n + m + 1
    sink = n + m
    n_job_arcs = 0
    for j in range(n):
        for d in range(m):
            if feasible[j, d]:
                n_job_arcs += 1
    n_arcs = 2 * (n_job_arcs + m)
    frm = np.empty(n_arcs, np.int64)
    to = np.empty(n_arcs, np.int64)
    rescap = np.zeros(n_arcs, np.int64)
    cost = np.zeros(n_arcs, np.int64)
    arc_dc = np.full(n_arcs, -1, np.int64)
    head = np.full(n_nodes, -1, np.int64)
    nxt = np.full(n_arcs, -1, np.int64)
    job_first = np.zeros(n, np.int64)
    job_last = np.zeros(n, np.int64)

    e = 0
    for j in range(n):
        job_first[j] = e
        for d in range(m):
            if not feasible[j, d]:
                continue
            v = n + d
            if incoming and prev[j] == d:
                v = sink
            frm[e] = j
            to[e] = v
            rescap[e] = 1
            cost[e] = qcost[j, d]
            arc_dc[e] = d
            frm[e + 1] = v
            to[e + 1] = j
            cost[e + 1] = -qcost[j, d]
            arc_dc[e + 1] = d
            e += 2
        job_last[j] = e
    for d in range(m):
        u = n + d
        frm[e] = u
        to[e] = sink
        rescap[e] = cap[d]
        frm[e + 1] = sink
        to[e + 1] = u
        e += 2

    # adjacency lists in arc order, so traversal order is fixed
    for a in range(n_arcs - 1, -1, -1):
        nxt[a] = head[frm[a]]
        head[frm[a]] = a
    return frm, to, rescap, cost, arc_dc, head, nxt, job_first, job_last


@njit
def _dijkstra(src, n_nodes, head, nxt, to, rescap, cost, pot, dist, done, par):
    for v in range(n_nodes):
        dist[v] = INF
        done[v] = False
        par[v] = -1
    dist[src] = 0
    while True:
        u = -1
        best = INF
        for v in range(n_nodes):
            if not done[v] and dist[v] < best:
                best = dist[v]
                u = v
        if u < 0:
            break
        done[u] = True
        a = head[u]
        while a >= 0:
            if rescap[a] > 0:
                v = to[a]
                if not done[v]:
                    nd = dist[u] + cost[a] + pot[u] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        par[v] = a
            a = nxt[a]


@njit
def _tight_path(start, target, skip_job, n_jobs, fixed, head, nxt, frm, to, rescap, cost, pot, par, seen, queue):
    """BFS over residual arcs of zero reduced cost; fills ``par`` on success."""
    n_nodes = seen.size
    for v in range(n_nodes):
        seen[v] = False
        par[v] = -1
    seen[start] = True
    qh = 0
    qt = 0
    queue[qt] = start
    qt += 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        if u == target:
            return True
        a = head[u]
        while a >= 0:
            v = to[a]
            if rescap[a] > 0 and not seen[v] and cost[a] + pot[u] - pot[v] == 0:
                if not (v == skip_job or (v < n_jobs and fixed[v])):
                    seen[v] = True
                    par[v] = a
                    queue[qt] = v
                    qt += 1
            a = nxt[a]
    return False


@njit
def ssp_assign(qcost, feasible, prev, cap, order, incoming):
    """Min-cost assignment of jobs to data centers.

    Returns ``(assign, status, bad_job)``. ``assign[j]`` is the data center
    index of job ``j`` or ``-1`` if it could not be routed. ``status`` is
    ``DEPLOYED_UNROUTABLE`` when a job with ``prev[j] >= 0`` found no route;
    ``bad_job`` names it.

    Among all minimum-cost assignments of the routed jobs, the one returned
    is lexicographically smallest in ``assign`` (job order, then data center
    order).
    """
    n, m = qcost.shape
    n_nodes = n + m + 1
    sink = n + m
    frm, to, rescap, cost, arc_dc, head, nxt, job_first, job_last = _build_network(qcost, feasible, prev, cap, incoming)

    pot = np.zeros(n_nodes, np.int64)
    dist = np.empty(n_nodes, np.int64)
    done = np.empty(n_nodes, np.bool_)
    par = np.empty(n_nodes, np.int64)
    routed = np.zeros(n, np.bool_)
    assign = np.full(n, -1, np.int64)

    for k in range(order.size):
        j = order[k]
        _dijkstra(j, n_nodes, head, nxt, to, rescap, cost, pot, dist, done, par)
        if dist[sink] >= INF:
            if prev[j] >= 0:
                return assign, DEPLOYED_UNROUTABLE, j
            continue
        maxd = np.int64(0)
        for v in range(n_nodes):
            if dist[v] < INF and dist[v] > maxd:
                maxd = dist[v]
        for v in range(n_nodes):
            if dist[v] < INF:
                pot[v] += dist[v]
            else:
                pot[v] += maxd
        v = sink
        while v != j:
            a = par[v]
            rescap[a] -= 1
            rescap[a ^ 1] += 1
            v = frm[a]
        routed[j] = True

    # Tie-break: walk jobs in order and move each to the smallest data center
    # reachable through a zero-reduced-cost cycle that leaves earlier jobs alone.
    fixed = np.zeros(n, np.bool_)
    seen = np.empty(n_nodes, np.bool_)
    queue = np.empty(n_nodes, np.int64)
    for j in range(n):
        if not routed[j]:
            continue
        cur = -1
        for a in range(job_first[j], job_last[j], 2):
            if rescap[a] == 0:
                cur = a
                break
        target = to[cur]
        for a in range(job_first[j], job_last[j], 2):
            if a == cur:
                break
            if cost[a] + pot[j] - pot[to[a]] != 0:
                continue
            if _tight_path(to[a], target, j, n, fixed, head, nxt, frm, to, rescap, cost, pot, par, seen, queue):
                v = target
                while v != to[a]:
                    b = par[v]
                    rescap[b] -= 1
                    rescap[b ^ 1] += 1
                    v = frm[b]
                rescap[a] -= 1
                rescap[a ^ 1] += 1
                rescap[cur] += 1
                rescap[cur ^ 1] -= 1
                break
        fixed[j] = True

    for j in range(n):
        if not routed[j]:
            continue
        for a in range(job_first[j], job_last[j], 2):
            if rescap[a] == 0:
                assign[j] = arc_dc[a]
                break
    return assign, OK, -1


@njit
def enumerate_best(qcost, feasible, prev, cap, order, incoming):
    """Exhaustive search with the same ranking as :func:`ssp_assign`.

    Ranking, most significant first: which jobs get placed (compared in
    priority ``order``, placing earlier jobs wins), total cost, then the
    assignment vector in job order. Only jobs with ``prev[j] < 0`` may be left
    out. Returns ``(assign, found)``.
    """
    n, m = qcost.shape
    choices = np.full((n, m + 1), -2, np.int64)
    n_choices = np.zeros(n, np.int64)
    for j in range(n):
        k = 0
        for d in range(m):
            if feasible[j, d]:
                choices[j, k] = d
                k += 1
        if prev[j] < 0:
            choices[j, k] = -1
            k += 1
        n_choices[j] = k
        if k == 0:
            return np.full(n, -1, np.int64), False

    idx = np.zeros(n, np.int64)
    cur = np.empty(n, np.int64)
    load = np.zeros(m, np.int64)
    best = np.full(n, -1, np.int64)
    best_cost = INF
    found = False
    while True:
        for d in range(m):
            load[d] = 0
        for j in range(n):
            d = choices[j, idx[j]]
            cur[j] = d
            if d >= 0 and not (incoming and prev[j] == d):
                load[d] += 1
        ok = True
        for d in range(m):
            if load[d] > cap[d]:
                ok = False
                break
        if ok:
            c = np.int64(0)
            for j in range(n):
                if cur[j] >= 0:
                    c += qcost[j, cur[j]]
            better = not found
            if found:
                decided = False
                for k in range(n):
                    jj = order[k]
                    pa = cur[jj] >= 0
                    pb = best[jj] >= 0
                    if pa != pb:
                        better = pa
                        decided = True
                        break
                if not decided:
                    if c != best_cost:
                        better = c < best_cost
                    else:
                        for j in range(n):
                            if cur[j] != best[j]:
                                better = cur[j] < best[j]
                                break
            if better:
                best[:] = cur
                best_cost = c
                found = True
        k = n - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < n_choices[k]:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return best, found
