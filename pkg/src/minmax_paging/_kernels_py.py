"""Pure-Python implementation of the solver's inner loop.

Mirrors ``_kernels.pyx`` operation for operation so both paths agree to the
last bit on the same platform libm.
"""

import math

OK = 0
BAD_GRADIENT = 1
STEP_LIMIT = 2

_NEWTON_ITERS = 60


def advance_round(x, c, sat, sat_at, m, q, inv_k, need, max_step, eps_feas, step_limit):
    """Grow the first ``m`` entries of ``x`` until sum(x) >= need.

    Coordinate i follows dx/dtau = (x + 1/k) / g_i with g_i = q (c_i + x_i)^(q-1)
    frozen over each step, so one step is x <- (x + 1/k) exp(dtau / g_i) - 1/k.
    Steps are cut so no coordinate grows by more than ``max_step`` and a
    coordinate reaching 1 lands exactly on 1; ``sat[i]`` is then set and
    ``sat_at[i]`` records the round-local clock at that moment.  The final
    step is shortened by Newton iteration from the right so the constraint
    lands within ``eps_feas``.

    Returns (status, elapsed clock, steps taken).
    """
    total = 0.0
    for i in range(m):
        total += x[i]
    if total >= need - eps_feas:
        return OK, 0.0, 0
    elapsed = 0.0
    steps = 0
    qm1 = q - 1.0
    one_plus = 1.0 + inv_k
    while True:
        if steps >= step_limit:
            return STEP_LIMIT, elapsed, steps
        dt = math.inf
        for i in range(m):
            if sat[i]:
                continue
            if qm1 == 0.0:
                g = 1.0
            else:
                g = q * (c[i] + x[i]) ** qm1
            if not (g > 0.0) or g == math.inf:
                return BAD_GRADIENT, elapsed, steps
            a = x[i] + inv_k
            d = math.log1p(max_step / a) * g
            if d < dt:
                dt = d
            d = math.log(one_plus / a) * g
            if d < dt:
                dt = d
        # trial step
        total = 0.0
        for i in range(m):
            if sat[i]:
                total += 1.0
            else:
                g = 1.0 if qm1 == 0.0 else q * (c[i] + x[i]) ** qm1
                v = (x[i] + inv_k) * math.exp(dt / g) - inv_k
                if v > 1.0:
                    v = 1.0
                total += v
        steps += 1
        if total >= need:
            u = dt
            for _ in range(_NEWTON_ITERS):
                h = -need
                dh = 0.0
                for i in range(m):
                    if sat[i]:
                        h += 1.0
                    else:
                        g = 1.0 if qm1 == 0.0 else q * (c[i] + x[i]) ** qm1
                        e = (x[i] + inv_k) * math.exp(u / g)
                        h += e - inv_k
                        dh += e / g
                if h <= 0.25 * eps_feas or dh <= 0.0:
                    break
                un = u - h / dh
                if not un < u:
                    break
                u = un if un > 0.0 else 0.5 * u
            for i in range(m):
                if not sat[i]:
                    g = 1.0 if qm1 == 0.0 else q * (c[i] + x[i]) ** qm1
                    v = (x[i] + inv_k) * math.exp(u / g) - inv_k
                    if v >= 1.0:
                        v = 1.0
                        sat[i] = 1
                        sat_at[i] = elapsed + u
                    x[i] = v
            return OK, elapsed + u, steps
        for i in range(m):
            if sat[i]:
                continue
            g = 1.0 if qm1 == 0.0 else q * (c[i] + x[i]) ** qm1
            a = x[i] + inv_k
            v = a * math.exp(dt / g) - inv_k
            if v >= 1.0 or math.log(one_plus / a) * g <= dt:
                x[i] = 1.0
                sat[i] = 1
                sat_at[i] = elapsed + dt
            else:
                x[i] = v
        elapsed += dt


class ActiveSet:
    """Growable set of unsaturated variables, keyed by variable id.

    Entries are removed by swapping in the last one, so the storage order
    (and with it the summation order inside ``advance``) matches the
    compiled class exactly.
    """

    def __init__(self, capacity=16):
        self.x = []
        self.c = []
        self.sat = []
        self.sat_at = []
        self.var = []
        self.pos = {}

    def __len__(self):
        return len(self.var)

    def __contains__(self, v):
        return v in self.pos

    def add(self, v, x, c):
        self.pos[v] = len(self.var)
        self.x.append(float(x))
        self.c.append(float(c))
        self.sat.append(0)
        self.sat_at.append(0.0)
        self.var.append(v)

    def _remove_at(self, i):
        xv = self.x[i]
        del self.pos[self.var[i]]
        last = len(self.var) - 1
        if i != last:
            for arr in (self.x, self.c, self.sat, self.sat_at, self.var):
                arr[i] = arr[last]
            self.pos[self.var[i]] = i
        for arr in (self.x, self.c, self.sat, self.sat_at, self.var):
            arr.pop()
        return xv

    def remove(self, v):
        return self._remove_at(self.pos[v])

    def get_x(self, v):
        return self.x[self.pos[v]]

    def advance(self, q, inv_k, need, max_step, eps_feas, step_limit):
        return advance_round(self.x, self.c, self.sat, self.sat_at, len(self.var), q, inv_k,
                             need, max_step, eps_feas, step_limit)

    def pop_saturated(self):
        out = []
        i = 0
        while i < len(self.var):
            if self.sat[i]:
                out.append((self.var[i], self.sat_at[i]))
                self._remove_at(i)
            else:
                i += 1
        return out

    def items(self):
        return list(zip(self.var, self.x))

    def power_sum(self, q):
        s = 0.0
        for ci, xi in zip(self.c, self.x):
            s += (ci + xi) ** q
        return s

    def sum_x(self):
        s = 0.0
        for xi in self.x:
            s += xi
        return s
