# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the fractional solver; see _kernels_py for the reference."""

from libc.math cimport exp, log, log1p, pow, INFINITY
from libc.stdlib cimport malloc, realloc, free

cdef int NEWTON_ITERS = 60

cdef int OK = 0
cdef int BAD_GRADIENT = 1
cdef int STEP_LIMIT = 2


cdef inline double _grad(double q, double qm1, double s) nogil:
    if qm1 == 0.0:
        return 1.0
    return q * pow(s, qm1)


cdef int _advance(double* x, double* c, unsigned char* sat, double* sat_at,
                  Py_ssize_t m, double q, double inv_k, double need, double max_step,
                  double eps_feas, long step_limit, double* elapsed_out,
                  long* steps_out) noexcept nogil:
    cdef Py_ssize_t i
    cdef int it
    cdef double total = 0.0, elapsed = 0.0, dt, d, g, a, v, u, un, h, dh, e
    cdef double qm1 = q - 1.0
    cdef double one_plus = 1.0 + inv_k
    cdef long steps = 0

    elapsed_out[0] = 0.0
    steps_out[0] = 0
    for i in range(m):
        total += x[i]
    if total >= need - eps_feas:
        return OK

    while True:
        if steps >= step_limit:
            elapsed_out[0] = elapsed
            steps_out[0] = steps
            return STEP_LIMIT
        dt = INFINITY
        for i in range(m):
            if sat[i]:
                continue
            g = _grad(q, qm1, c[i] + x[i])
            if not (g > 0.0) or g == INFINITY:
                elapsed_out[0] = elapsed
                steps_out[0] = steps
                return BAD_GRADIENT
            a = x[i] + inv_k
            d = log1p(max_step / a) * g
            if d < dt:
                dt = d
            d = log(one_plus / a) * g
            if d < dt:
                dt = d
        total = 0.0
        for i in range(m):
            if sat[i]:
                total += 1.0
            else:
                g = _grad(q, qm1, c[i] + x[i])
                v = (x[i] + inv_k) * exp(dt / g) - inv_k
                if v > 1.0:
                    v = 1.0
                total += v
        steps += 1
        if total >= need:
            u = dt
            for it in range(NEWTON_ITERS):
                h = -need
                dh = 0.0
                for i in range(m):
                    if sat[i]:
                        h += 1.0
                    else:
                        g = _grad(q, qm1, c[i] + x[i])
                        e = (x[i] + inv_k) * exp(u / g)
                        h += e - inv_k
                        dh += e / g
                if h <= 0.25 * eps_feas or dh <= 0.0:
                    break
                un = u - h / dh
                if not un < u:
                    break
                if un > 0.0:
                    u = un
                else:
                    u = 0.5 * u
            for i in range(m):
                if not sat[i]:
                    g = _grad(q, qm1, c[i] + x[i])
                    v = (x[i] + inv_k) * exp(u / g) - inv_k
                    if v >= 1.0:
                        v = 1.0
                        sat[i] = 1
                        sat_at[i] = elapsed + u
                    x[i] = v
            elapsed_out[0] = elapsed + u
            steps_out[0] = steps
            return OK
        for i in range(m):
            if sat[i]:
                continue
            g = _grad(q, qm1, c[i] + x[i])
            a = x[i] + inv_k
            v = a * exp(dt / g) - inv_k
            if v >= 1.0 or log(one_plus / a) * g <= dt:
                x[i] = 1.0
                sat[i] = 1
                sat_at[i] = elapsed + dt
            else:
                x[i] = v
        elapsed += dt


def advance_round(double[::1] x, double[::1] c, unsigned char[::1] sat,
                  double[::1] sat_at, Py_ssize_t m, double q, double inv_k,
                  double need, double max_step, double eps_feas, long step_limit):
    cdef double elapsed
    cdef long steps
    cdef int status
    with nogil:
        status = _advance(&x[0] if m > 0 else NULL, &c[0] if m > 0 else NULL,
                          &sat[0] if m > 0 else NULL, &sat_at[0] if m > 0 else NULL,
                          m, q, inv_k, need, max_step, eps_feas, step_limit,
                          &elapsed, &steps)
    return status, elapsed, steps


cdef class ActiveSet:
    """Growable set of unsaturated variables, keyed by variable id."""

    cdef double* x
    cdef double* c
    cdef unsigned char* sat
    cdef double* sat_at
    cdef long* var
    cdef Py_ssize_t m, cap
    cdef dict pos

    def __cinit__(self, Py_ssize_t capacity=16):
        if capacity < 1:
            capacity = 1
        self.cap = capacity
        self.m = 0
        self.x = <double*> malloc(capacity * sizeof(double))
        self.c = <double*> malloc(capacity * sizeof(double))
        self.sat = <unsigned char*> malloc(capacity * sizeof(unsigned char))
        self.sat_at = <double*> malloc(capacity * sizeof(double))
        self.var = <long*> malloc(capacity * sizeof(long))
        if not (self.x and self.c and self.sat and self.sat_at and self.var):
            raise MemoryError()
        self.pos = {}

    def __dealloc__(self):
        free(self.x)
        free(self.c)
        free(self.sat)
        free(self.sat_at)
        free(self.var)

    cdef void _grow(self) except *:
        cdef Py_ssize_t cap = self.cap * 2
        cdef double* nx = <double*> realloc(self.x, cap * sizeof(double))
        if nx == NULL:
            raise MemoryError()
        self.x = nx
        nx = <double*> realloc(self.c, cap * sizeof(double))
        if nx == NULL:
            raise MemoryError()
        self.c = nx
        nx = <double*> realloc(self.sat_at, cap * sizeof(double))
        if nx == NULL:
            raise MemoryError()
        self.sat_at = nx
        cdef unsigned char* ns = <unsigned char*> realloc(self.sat, cap * sizeof(unsigned char))
        if ns == NULL:
            raise MemoryError()
        self.sat = ns
        cdef long* nv = <long*> realloc(self.var, cap * sizeof(long))
        if nv == NULL:
            raise MemoryError()
        self.var = nv
        self.cap = cap

    def __len__(self):
        return self.m

    def __contains__(self, long v):
        return v in self.pos

    def add(self, long v, double x, double c):
        if self.m == self.cap:
            self._grow()
        cdef Py_ssize_t i = self.m
        self.x[i] = x
        self.c[i] = c
        self.sat[i] = 0
        self.sat_at[i] = 0.0
        self.var[i] = v
        self.pos[v] = i
        self.m += 1

    cdef double _remove_at(self, Py_ssize_t i):
        cdef double xv = self.x[i]
        cdef Py_ssize_t last = self.m - 1
        del self.pos[self.var[i]]
        if i != last:
            self.x[i] = self.x[last]
            self.c[i] = self.c[last]
            self.sat[i] = self.sat[last]
            self.sat_at[i] = self.sat_at[last]
            self.var[i] = self.var[last]
            self.pos[self.var[i]] = i
        self.m = last
        return xv

    def remove(self, long v):
        """Drop variable v and return its value."""
        return self._remove_at(self.pos[v])

    def get_x(self, long v):
        return self.x[<Py_ssize_t> self.pos[v]]

    def advance(self, double q, double inv_k, double need, double max_step,
                double eps_feas, long step_limit):
        cdef double elapsed
        cdef long steps
        cdef int status
        with nogil:
            status = _advance(self.x, self.c, self.sat, self.sat_at, self.m, q, inv_k,
                              need, max_step, eps_feas, step_limit, &elapsed, &steps)
        return status, elapsed, steps

    def pop_saturated(self):
        """Remove saturated entries; return [(var, clock offset of saturation)]."""
        cdef Py_ssize_t i = 0
        out = []
        while i < self.m:
            if self.sat[i]:
                out.append((self.var[i], self.sat_at[i]))
                self._remove_at(i)
            else:
                i += 1
        return out

    def items(self):
        return [(self.var[i], self.x[i]) for i in range(self.m)]

    def power_sum(self, double q):
        """Sum over entries of (c + x)^q."""
        cdef double s = 0.0
        cdef Py_ssize_t i
        for i in range(self.m):
            s += pow(self.c[i] + self.x[i], q)
        return s

    def sum_x(self):
        cdef double s = 0.0
        cdef Py_ssize_t i
        for i in range(self.m):
            s += self.x[i]
        return s
