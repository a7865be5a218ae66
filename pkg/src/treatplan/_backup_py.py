"""Pure-Python backup kernel for the decision-tree planner.

Computes the root value and root action of the alternating decision/chance
tree by recursion with exact memoisation: two interior decision nodes with the
same (remaining sessions, conditioning bin, score estimate) are the same
subproblem bit-for-bit, because accumulated cost is a function of depth. The
compiled kernel in ``_backup.pyx`` implements the identical arithmetic in the
identical order; results must match exactly.

Conditioning kinds: 0 = none (single tiled row), 1 = previous one-step bin,
2 = re-binned change since baseline.
"""
from __future__ import annotations


def solve_backup(
    table,
    means,
    root_probs,
    root_score: float,
    baseline: float,
    smin: float,
    smax: float,
    edges,
    cond_kind: int,
    remaining: int,
    root_cost: float,
    cps: float,
    osf_eff: float,
    delta_max: float,
    maxprob: bool,
):
    """Root (value, action) of the planning tree; action 1 = treat, 0 = stop."""
    t = [tuple(float(x) for x in row) for row in table]
    m = tuple(float(x) for x in means)
    rp = tuple(float(x) for x in root_probs)
    e0, e1, e2, e3 = (float(x) for x in edges)
    smin = float(smin)
    smax = float(smax)
    cps = float(cps)
    osf_eff = float(osf_eff)
    delta_max = float(delta_max)
    baseline = float(baseline)
    memo: dict = {}

    def leaf(cost, score):
        delta = score - baseline
        if delta >= 1.0:
            v = cost / delta
        else:
            v = cost + (1.0 - delta) * cps
        return v + osf_eff * ((delta_max - delta) / delta_max)

    def child(rem1, score, n, cost2):
        s2 = score + m[n]
        if s2 < smin:
            s2 = smin
        elif s2 > smax:
            s2 = smax
        if rem1 == 0:
            return leaf(cost2, s2)
        if cond_kind == 1:
            cond = n
        elif cond_kind == 2:
            d = s2 - baseline
            if d < e0:
                cond = 0
            elif d < e1:
                cond = 1
            elif d <= e2:
                cond = 2
            elif d <= e3:
                cond = 3
            else:
                cond = 4
        else:
            cond = 0
        key = (rem1, cond, s2)
        v = memo.get(key)
        if v is None:
            v = node(rem1, s2, t[cond], cost2)[0]
            memo[key] = v
        return v

    def node(rem, score, row, cost):
        v_stop = leaf(cost, score)
        cost2 = cost + cps
        rem1 = rem - 1
        if maxprob:
            best = 0
            best_p = row[0]
            for n in range(1, 5):
                if row[n] > best_p:
                    best_p = row[n]
                    best = n
            v_treat = child(rem1, score, best, cost2)
        else:
            acc = 0.0
            for n in range(5):
                p = row[n]
                if p != 0.0:
                    acc = acc + p * child(rem1, score, n, cost2)
            v_treat = acc
        if v_treat < v_stop:
            return v_treat, 1
        return v_stop, 0

    qmix = []
    for n in range(5):
        acc = 0.0
        for c in range(5):
            acc = acc + rp[c] * t[c][n]
        qmix.append(acc)
    return node(int(remaining), float(root_score), qmix, float(root_cost))
