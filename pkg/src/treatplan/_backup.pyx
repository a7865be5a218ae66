# cython: boundscheck=False, wraparound=False, cdivision=False
"""Compiled backup kernel for the decision-tree planner.

Mirror of ``_backup_py.solve_backup``: same recursion, same memoisation, same
floating-point operation order, so both kernels return bit-identical results.
Keep the two files in sync when touching either.
"""


cdef class _Solver:
    cdef double t[5][5]
    cdef double m[5]
    cdef double e0, e1, e2, e3
    cdef double smin, smax, cps, osf_eff, delta_max, baseline
    cdef int cond_kind
    cdef bint maxprob
    cdef dict memo

    cdef double leaf(self, double cost, double score):
        cdef double delta = score - self.baseline
        cdef double v
        if delta >= 1.0:
            v = cost / delta
        else:
            v = cost + (1.0 - delta) * self.cps
        return v + self.osf_eff * ((self.delta_max - delta) / self.delta_max)

    cdef double child(self, int rem1, double score, int n, double cost2):
        cdef double s2 = score + self.m[n]
        cdef double d
        cdef int cond
        if s2 < self.smin:
            s2 = self.smin
        elif s2 > self.smax:
            s2 = self.smax
        if rem1 == 0:
            return self.leaf(cost2, s2)
        if self.cond_kind == 1:
            cond = n
        elif self.cond_kind == 2:
            d = s2 - self.baseline
            if d < self.e0:
                cond = 0
            elif d < self.e1:
                cond = 1
            elif d <= self.e2:
                cond = 2
            elif d <= self.e3:
                cond = 3
            else:
                cond = 4
        else:
            cond = 0
        key = (rem1, cond, s2)
        cached = self.memo.get(key)
        cdef double v
        if cached is None:
            v = self.node_value(rem1, s2, self.t[cond], cost2)
            self.memo[key] = v
            return v
        return <double> cached

    cdef double node_value(self, int rem, double score, double* row, double cost):
        cdef int action = 0
        return self.node(rem, score, row, cost, &action)

    cdef double node(self, int rem, double score, double* row, double cost, int* action):
        cdef double v_stop = self.leaf(cost, score)
        cdef double cost2 = cost + self.cps
        cdef int rem1 = rem - 1
        cdef double v_treat, acc, p, best_p
        cdef int n, best
        if self.maxprob:
            best = 0
            best_p = row[0]
            for n in range(1, 5):
                if row[n] > best_p:
                    best_p = row[n]
                    best = n
            v_treat = self.child(rem1, score, best, cost2)
        else:
            acc = 0.0
            for n in range(5):
                p = row[n]
                if p != 0.0:
                    acc = acc + p * self.child(rem1, score, n, cost2)
            v_treat = acc
        if v_treat < v_stop:
            action[0] = 1
            return v_treat
        action[0] = 0
        return v_stop


def solve_backup(
    table,
    means,
    root_probs,
    double root_score,
    double baseline,
    double smin,
    double smax,
    edges,
    int cond_kind,
    int remaining,
    double root_cost,
    double cps,
    double osf_eff,
    double delta_max,
    bint maxprob,
):
    """Root (value, action) of the planning tree; action 1 = treat, 0 = stop."""
    cdef _Solver s = _Solver()
    cdef int i, j
    for i in range(5):
        row = table[i]
        for j in range(5):
            s.t[i][j] = <double> row[j]
    for i in range(5):
        s.m[i] = <double> means[i]
    cdef double rp[5]
    for i in range(5):
        rp[i] = <double> root_probs[i]
    s.e0 = <double> edges[0]
    s.e1 = <double> edges[1]
    s.e2 = <double> edges[2]
    s.e3 = <double> edges[3]
    s.smin = smin
    s.smax = smax
    s.cps = cps
    s.osf_eff = osf_eff
    s.delta_max = delta_max
    s.baseline = baseline
    s.cond_kind = cond_kind
    s.maxprob = maxprob
    s.memo = {}

    cdef double qmix[5]
    cdef double acc
    for j in range(5):
        acc = 0.0
        for i in range(5):
            acc = acc + rp[i] * s.t[i][j]
        qmix[j] = acc

    cdef int action = 0
    cdef double value = s.node(remaining, root_score, qmix, root_cost, &action)
    return value, action
