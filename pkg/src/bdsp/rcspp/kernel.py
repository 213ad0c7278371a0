"""Compiled label setting for float duals with the two-pass k-d store.

Mirrors ``labels.extend_label``, ``labels.dominance_key`` and
``dominance.KDStore``/``second_pass`` on flat arrays. The pure-Python
implementation stays the reference; tests compare both.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ..model import RulesConfig
from .graph import PricingGraph

INF_END = 10**9
K_MAX = 9

# integer resource columns
D, S, DC, B15, B20, W, R, U, B30, BC30, NODE, PRED = range(12)
N_INT = 12

# rule vector layout
(
    RL_DRIVE_MAX, RL_SPAN_MAX, RL_WORK_MAX, RL_WORK_MIN, RL_BLOCK_MAX, RL_UNPAID_EDGE, RL_CENTERED_EDGE,
    RL_PART_MIN, RL_LONG_PART, RL_FIRST_DEADLINE, RL_TIER_LONG, RL_REQUIRED_LONG, RL_BREAK_ONE, RL_BREAK_TWO,
    RL_BREAK_THREE, RL_WEIGHT_WORK,
) = range(16)


def rule_vector(R_: RulesConfig) -> np.ndarray:
    return np.array(
        [
            R_.drive_max, R_.span_max, R_.work_max, R_.work_min, R_.drive_block_max, R_.unpaid_edge, R_.centered_edge,
            R_.rest_part_min, R_.rest_long_part, R_.rest_first_deadline, R_.rest_tier_long, R_.rest_required_long,
            R_.break_one, R_.break_two, R_.break_three, R_.weight_work,
        ],
        dtype=np.int64,
    )


class GraphArrays:
    """CSR view of a pricing graph, built once per graph."""

    def __init__(self, g: PricingGraph):
        n = g.n_nodes
        legs = g.inst.legs
        self.n = n
        ptr = np.zeros(n + 1, dtype=np.int64)
        heads, length, ride, remain, rest, cost, tail_end, inner, btail, bhead = ([] for _ in range(10))
        for v in range(n):
            for h, a in g.out[v]:
                heads.append(h)
                length.append(a.length)
                ride.append(a.ride)
                remain.append(a.remain)
                rest.append(a.rest)
                cost.append(a.cost)
                tail_end.append(a.tail_end)
                inner.append(a.inner)
                btail.append(a.tail)
                bhead.append(a.head)
            ptr[v + 1] = len(heads)
        self.ptr = ptr
        self.head = np.array(heads, dtype=np.int64)
        self.length = np.array(length, dtype=np.int64)
        self.ride = np.array(ride, dtype=np.int64)
        self.remain = np.array(remain, dtype=np.int64)
        self.rest = np.array(rest, dtype=np.int64)
        self.cost = np.array(cost, dtype=np.int64)
        self.tail_end = np.array(tail_end, dtype=np.int64)
        self.inner = np.array(inner, dtype=np.bool_)
        self.base_tail = np.array(btail, dtype=np.int64)
        self.base_head = np.array(bhead, dtype=np.int64)
        self.node_leg = np.array(g.node_leg, dtype=np.int64)
        self.node_end = np.array([INF_END if e == float("inf") else int(e) for e in g.node_end], dtype=np.int64)
        w = g.inst.rules.weight_work + g.inst.rules.weight_span
        self.node_drive = np.array([legs[l].drive if l >= 0 else 0 for l in g.node_leg], dtype=np.int64)
        self.node_cost = w * self.node_drive
        self.rules_config = g.inst.rules
        self.rules = rule_vector(g.inst.rules)
        self.forbidden = np.zeros(len(heads), dtype=np.bool_)

    def set_forbidden(self, pairs) -> None:
        pairs = set(pairs)
        if not pairs:
            self.forbidden[:] = False
            return
        self.forbidden = np.array([(int(t), int(h)) in pairs for t, h in zip(self.base_tail, self.base_head)], dtype=np.bool_)

    def node_duals(self, duals) -> np.ndarray:
        d = np.asarray(duals, dtype=np.float64)
        out = np.zeros(self.n, dtype=np.float64)
        mask = self.node_leg >= 0
        out[mask] = d[self.node_leg[mask]]
        return out


@njit(cache=True)
def _admitted(ga_inner, ga_cost, ga_rest, forbidden, cap, variant, long_part):
    m = ga_cost.shape[0]
    ok = np.empty(m, dtype=np.bool_)
    for e in range(m):
        a = True
        if ga_inner[e] and ga_cost[e] > cap:
            a = False
        elif variant == 0 and ga_rest[e] >= long_part:
            a = False
        elif forbidden[e]:
            a = False
        ok[e] = a
    return ok


@njit(cache=True)
def cost_bound_kernel(n, ptr, head, cost, node_cost, ndual, ok):
    B = np.full(n, -np.inf)
    B[1] = 0.0
    for step in range(n - 1):
        v = n - 1 - step if step < n - 2 else 0
        best = -np.inf
        for e in range(ptr[v], ptr[v + 1]):
            if not ok[e]:
                continue
            h = head[e]
            val = B[h] - (cost[e] + node_cost[h] - ndual[h])
            if val > best:
                best = val
        B[v] = best
    return B


@njit(cache=True)
def _grow_int(a, size):
    b = np.empty((size, a.shape[1]), dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow1(a, size):
    b = np.empty(size, dtype=a.dtype)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _key(lab_int, lab_cost, idx, variant, centered_edge, ww, vec):
    """Bucket key and dominance vector (smaller is better) of one label."""
    b15 = lab_int[idx, B15]
    b20 = lab_int[idx, B20]
    if b15 >= 2:
        state = 3
    elif b15 == 1:
        state = 1 + b20
    else:
        state = 0
    w = lab_int[idx, W]
    g = lab_cost[idx] - ww * w
    vec[0] = lab_int[idx, D]
    vec[1] = lab_int[idx, S]
    vec[2] = lab_int[idx, DC]
    if variant == 0:
        vec[3] = w
        vec[4] = g
        return state, 5
    s = lab_int[idx, S]
    span_class = s if s < centered_edge else centered_edge
    vec[3] = -lab_int[idx, R]
    vec[4] = w
    vec[5] = w + lab_int[idx, U]
    vec[6] = g
    vec[7] = -lab_int[idx, B30]
    k = 8
    if variant == 2:
        vec[8] = -lab_int[idx, BC30]
        k = 9
    return state * (centered_edge + 1) + span_class, k


@njit(cache=True)
def _dominated(root, q, k, vecs, lo, left, right, depth, stack):
    if root < 0:
        return False
    top = 0
    stack[0] = root
    top = 1
    while top > 0:
        top -= 1
        nd = stack[top]
        skip = False
        for i in range(k):
            if lo[nd, i] > q[i]:
                skip = True
                break
        if skip:
            continue
        dom = True
        for i in range(k):
            if vecs[nd, i] > q[i]:
                dom = False
                break
        if dom:
            return True
        dim = depth[nd] % k
        if left[nd] >= 0:
            stack[top] = left[nd]
            top += 1
        if right[nd] >= 0 and vecs[nd, dim] <= q[dim]:
            stack[top] = right[nd]
            top += 1
    return False


@njit(cache=True)
def _insert(root, idx, k, vecs, lo, left, right, depth):
    left[idx] = -1
    right[idx] = -1
    for i in range(k):
        lo[idx, i] = vecs[idx, i]
    if root < 0:
        depth[idx] = 0
        return idx
    nd = root
    while True:
        for i in range(k):
            if vecs[idx, i] < lo[nd, i]:
                lo[nd, i] = vecs[idx, i]
        dim = depth[nd] % k
        if vecs[idx, dim] < vecs[nd, dim]:
            if left[nd] < 0:
                left[nd] = idx
                depth[idx] = depth[nd] + 1
                return root
            nd = left[nd]
        else:
            if right[nd] < 0:
                right[nd] = idx
                depth[idx] = depth[nd] + 1
                return root
            nd = right[nd]


@njit(cache=True)
def label_setting_kernel(
    n, ptr, head, length, ride, remain, rest, cost, tail_end, inner, node_leg, node_end, node_drive, node_cost,
    ndual, ok, B, use_bound, variant, cap, rules, tol,
):
    """Returns (int resources, costs, sink label preds, sink reduced costs,
    min reduced cost, labels created, labels expanded)."""
    drive_max = rules[RL_DRIVE_MAX]
    span_max = rules[RL_SPAN_MAX]
    work_max = rules[RL_WORK_MAX]
    work_min = rules[RL_WORK_MIN]
    block_max = rules[RL_BLOCK_MAX]
    edge = rules[RL_UNPAID_EDGE]
    cedge = rules[RL_CENTERED_EDGE]
    part_min = rules[RL_PART_MIN]
    long_part = rules[RL_LONG_PART]
    deadline = rules[RL_FIRST_DEADLINE]
    tier = rules[RL_TIER_LONG]
    req_long = rules[RL_REQUIRED_LONG]
    br1 = rules[RL_BREAK_ONE]
    br2 = rules[RL_BREAK_TWO]
    br3 = rules[RL_BREAK_THREE]
    ww = rules[RL_WEIGHT_WORK]
    slack = ww * cap

    size = 1024
    L = np.zeros((size, N_INT), dtype=np.int64)
    C = np.zeros(size, dtype=np.float64)
    vecs = np.zeros((size, K_MAX), dtype=np.float64)
    lo = np.zeros((size, K_MAX), dtype=np.float64)
    left = np.full(size, -1, dtype=np.int64)
    right = np.full(size, -1, dtype=np.int64)
    depth = np.zeros(size, dtype=np.int64)
    bucket = np.zeros(size, dtype=np.int64)
    nxt = np.full(size, -1, dtype=np.int64)  # per-node list, newest first
    stack = np.zeros(size, dtype=np.int64)
    node_first = np.full(n, -1, dtype=np.int64)
    nkeys = (cedge + 1) * 4
    roots = np.full(n * nkeys, -1, dtype=np.int64)  # pass-one tree per (node, bucket)
    rank_of = np.full(n * nkeys, -1, dtype=np.int64)
    n_ranks = 0
    local = np.full(nkeys, -1, dtype=np.int64)  # pass-two roots of the current node
    rank = np.zeros(size, dtype=np.int64)  # creation rank of the label's bucket
    q = np.zeros(K_MAX, dtype=np.float64)

    sink_pred = np.zeros(64, dtype=np.int64)
    sink_rc = np.zeros(64, dtype=np.float64)
    n_sink = 0
    min_rc = np.inf
    created = 0
    expanded = 0

    # source label
    count = 1
    L[0, NODE] = 0
    L[0, PRED] = -1
    survivors = np.zeros(64, dtype=np.int64)

    for v in range(n):
        if v == 1:
            continue
        # survivors in insertion order
        n_surv = 0
        if v == 0:
            survivors[0] = 0
            n_surv = 1
        else:
            idx = node_first[v]
            if idx < 0:
                continue
            while idx >= 0:
                kb = bucket[idx]
                k = 5 if variant == 0 else (8 if variant == 1 else 9)
                r0 = local[kb]
                if not _dominated(r0, vecs[idx], k, vecs, lo, left, right, depth, stack):
                    local[kb] = _insert(r0, idx, k, vecs, lo, left, right, depth)
                    if n_surv >= survivors.shape[0]:
                        survivors = _grow1(survivors, 2 * survivors.shape[0])
                    survivors[n_surv] = idx
                    n_surv += 1
                idx = nxt[idx]
            for a in range(n_surv):
                local[bucket[survivors[a]]] = -1
            # bucket by bucket in creation order, insertion order inside
            order = np.empty(n_surv, dtype=np.int64)
            for a in range(n_surv):
                order[a] = rank[survivors[a]] * size + survivors[a]
            order.sort()
            for a in range(n_surv):
                survivors[a] = order[a] % size
        expanded += n_surv
        for si in range(n_surv):
            x = survivors[si]
            x_s = L[x, S]
            x_u = L[x, U]
            x_cost = C[x]
            for e in range(ptr[v], ptr[v + 1]):
                if not ok[e]:
                    continue
                h = head[e]
                ln = length[e]
                hd = node_drive[h]
                # drive blocks
                if inner[e]:
                    rd = ln >= br1 or (ln >= br2 and L[x, B20] >= 1) or (ln >= br3 and L[x, B15] >= 2)
                else:
                    rd = False
                if rd:
                    dc = hd
                    b15 = 0
                    b20 = 0
                elif inner[e]:
                    dc = L[x, DC] + hd
                    b15 = L[x, B15] + (1 if ln >= br3 else 0)
                    b20 = L[x, B20] + (1 if ln >= br2 else 0)
                else:
                    dc = L[x, DC] + hd
                    b15 = L[x, B15]
                    b20 = L[x, B20]
                rs = rest[e]
                u = x_u
                bc30 = L[x, BC30]
                b30 = L[x, B30]
                r = L[x, R]
                if rs > 0:
                    r = min(r + rs, req_long)
                    if rs >= long_part:
                        b30 = 1
                    te = tail_end[e]
                    he = node_end[h]
                    unpaid = rs - max(edge - x_s, 0) - max(te + rs - (he - edge), 0)
                    if unpaid >= part_min:
                        u = min(u + unpaid, cap)
                    cpart = rs - max(cedge - x_s, 0) - max(te + rs - (he - cedge), 0)
                    if cpart >= long_part:
                        bc30 = 1
                d = L[x, D] + hd
                s = x_s + ln + hd
                w = L[x, W] + x_u - u + remain[e] + ride[e] + hd
                c = x_cost + ww * (x_u - u) + cost[e] + node_cost[h] - ndual[h]
                if d > drive_max or s > span_max or dc > block_max or w > work_max:
                    continue
                if w >= deadline and r < part_min:
                    continue
                if variant == 0 and w >= deadline:
                    continue
                if variant == 1 and bc30 == 1:
                    continue
                if h == 1:
                    if w > tier and r < req_long:
                        continue
                    if w >= deadline and b30 == 0:
                        continue
                    if variant == 0 and b30 == 1:
                        continue
                    if variant == 1 and (b30 == 0 or bc30 == 1):
                        continue
                    if variant == 2 and (b30 == 0 or bc30 == 0):
                        continue
                    created += 1
                    rc = c + ww * max(work_min - w, 0)
                    if rc < min_rc:
                        min_rc = rc
                    if rc < -tol:
                        if n_sink >= sink_pred.shape[0]:
                            sink_pred = _grow1(sink_pred, 2 * sink_pred.shape[0])
                            sink_rc = _grow1(sink_rc, 2 * sink_rc.shape[0])
                        sink_pred[n_sink] = x
                        sink_rc[n_sink] = rc
                        n_sink += 1
                    continue
                created += 1
                if use_bound and c + ww * u - slack - B[h] >= -tol:
                    continue
                if count >= size:
                    size *= 2
                    L = _grow_int(L, size)
                    C = _grow1(C, size)
                    vecs = _grow_int(vecs, size)
                    lo = _grow_int(lo, size)
                    left = _grow1(left, size)
                    right = _grow1(right, size)
                    depth = _grow1(depth, size)
                    bucket = _grow1(bucket, size)
                    nxt = _grow1(nxt, size)
                    stack = _grow1(stack, size)
                    rank = _grow1(rank, size)
                y = count
                L[y, D] = d
                L[y, S] = s
                L[y, DC] = dc
                L[y, B15] = b15
                L[y, B20] = b20
                L[y, W] = w
                L[y, R] = r
                L[y, U] = u
                L[y, B30] = b30
                L[y, BC30] = bc30
                L[y, NODE] = h
                L[y, PRED] = x
                C[y] = c
                kb, k = _key(L, C, y, variant, cedge, ww, q)
                key = h * nkeys + kb
                r0 = roots[key]
                if _dominated(r0, q, k, vecs, lo, left, right, depth, stack):
                    continue
                if r0 < 0:
                    rank_of[key] = n_ranks
                    n_ranks += 1
                rank[y] = rank_of[key]
                for i in range(k):
                    vecs[y, i] = q[i]
                roots[key] = _insert(r0, y, k, vecs, lo, left, right, depth)
                bucket[y] = kb
                nxt[y] = node_first[h]
                node_first[h] = y
                count += 1
    return L[:count], sink_pred[:n_sink], sink_rc[:n_sink], min_rc, created, expanded


def decode(L: np.ndarray, node_leg: np.ndarray, idx: int) -> tuple[int, ...]:
    out = []
    while idx > 0:
        out.append(int(node_leg[L[idx, NODE]]))
        idx = int(L[idx, PRED])
    return tuple(reversed(out))


@njit(cache=True)
def two_stage_filter_kernel(vectors):
    """Compiled ``dominance.two_stage_filter`` on the pricing store routines:
    survivor indices in input order."""
    n, k = vectors.shape
    vecs = vectors.astype(np.float64)
    lo = np.zeros((n, k), dtype=np.float64)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    stack = np.zeros(n + 1, dtype=np.int64)
    kept = np.zeros(n, dtype=np.int64)
    n_kept = 0
    root = -1
    for i in range(n):
        if not _dominated(root, vecs[i], k, vecs, lo, left, right, depth, stack):
            root = _insert(root, i, k, vecs, lo, left, right, depth)
            kept[n_kept] = i
            n_kept += 1
    root = -1
    out = np.zeros(n_kept, dtype=np.int64)
    m = 0
    for a in range(n_kept - 1, -1, -1):
        i = kept[a]
        if not _dominated(root, vecs[i], k, vecs, lo, left, right, depth, stack):
            root = _insert(root, i, k, vecs, lo, left, right, depth)
            out[m] = i
            m += 1
    return out[:m][::-1].copy()
