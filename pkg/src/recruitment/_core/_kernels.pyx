# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: the retirement DP on the signal lattice and the
Monte Carlo trial loop.  ``_fallback.py`` mirrors both line by line."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, isnan, INFINITY, NAN
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _unit(uint64_t z) nogil:
    return <double>(z >> 11) * (1.0 / 9007199254740992.0)


cdef inline double _odds_to_prob(double lo) nogil:
    cdef double e
    if lo == INFINITY:
        return 1.0
    if lo == -INFINITY or isnan(lo):
        return 0.0
    if lo >= 0:
        return 1.0 / (1.0 + exp(-lo))
    e = exp(lo)
    return e / (1.0 + e)


cdef class Lattice:
    """Non-acceptable states reachable from a start state within ``horizon`` evaluations.

    At depth k the states are (n1 + i, n0 + k - i); the posterior is
    increasing in i, so the non-acceptable ones form a prefix of length
    ``width[k]``.  ``accv[k]`` is the hire value of the first acceptable
    state at depth k.
    """
    cdef readonly int horizon
    cdef readonly double delta, v
    cdef double[::1] _pr1
    cdef double[::1] _post
    cdef int64_t[::1] _offset
    cdef int64_t[::1] _width
    cdef double[::1] _accv
    cdef double[::1] _row_a
    cdef double[::1] _row_b

    def __init__(self, double log_odds0, double alpha, double beta, double qH, double qL,
                 double pbar, double v, double delta, int horizon, int n1, int n0):
        cdef int k, i, m1, m0
        cdef double lo, p
        cdef list pr1 = [], post = []
        self.horizon = horizon
        self.delta = delta
        self.v = v
        offset = np.zeros(horizon + 2, dtype=np.int64)
        width = np.zeros(horizon + 1, dtype=np.int64)
        accv = np.full(horizon + 1, np.nan)
        for k in range(horizon + 1):
            offset[k] = len(pr1)
            i = 0
            while i <= k:
                m1 = n1 + i
                m0 = n0 + k - i
                lo = log_odds0
                if m1:
                    lo += m1 * alpha
                if m0:
                    lo += m0 * beta
                p = _odds_to_prob(lo)
                if p >= pbar:
                    accv[k] = p * v
                    break
                pr1.append(p * qH + (1.0 - p) * (1.0 - qL))
                post.append(p)
                i += 1
            width[k] = i
        offset[horizon + 1] = len(pr1)
        self._pr1 = np.asarray(pr1, dtype=np.float64)
        self._post = np.asarray(post, dtype=np.float64)
        self._offset = offset
        self._width = width
        self._accv = accv
        self._row_a = np.zeros(horizon + 2)
        self._row_b = np.zeros(horizon + 2)

    @property
    def widths(self):
        return np.asarray(self._width)

    @property
    def offsets(self):
        return np.asarray(self._offset)

    @property
    def posteriors(self):
        return np.asarray(self._post)

    @property
    def hire_values(self):
        return np.asarray(self._accv)

    @property
    def prob_one(self):
        return np.asarray(self._pr1)

    cdef double _sweep(self, double M, bint upper, unsigned char* stop) nogil:
        cdef int H = self.horizon
        cdef int k, i, wk, wn
        cdef int64_t off
        cdef double c, p1, edge
        cdef double* nxt = &self._row_a[0]
        cdef double* cur = &self._row_b[0]
        cdef double* tmp
        edge = M
        if upper and self.v > M:
            edge = self.v
        for i in range(self._width[H]):
            nxt[i] = edge
            if stop != NULL:
                stop[self._offset[H] + i] = 1
        c = M
        for k in range(H - 1, -1, -1):
            wk = self._width[k]
            wn = self._width[k + 1]
            off = self._offset[k]
            for i in range(wk):
                p1 = self._pr1[off + i]
                c = 0.0
                if p1 > 0.0:
                    if i + 1 < wn:
                        c = c + p1 * self.delta * nxt[i + 1]
                    else:
                        c = c + p1 * self._accv[k + 1]
                if p1 < 1.0:
                    if i < wn:
                        c = c + (1.0 - p1) * self.delta * nxt[i]
                    else:
                        c = c + (1.0 - p1) * self._accv[k + 1]
                if stop != NULL:
                    stop[off + i] = 1 if c <= M else 0
                cur[i] = c if c > M else M
            tmp = nxt
            nxt = cur
            cur = tmp
        return c

    def continuation(self, double M, bint upper=False):
        """Value of evaluating the root once more, then acting optimally
        against a retirement option worth ``M``."""
        return self._sweep(M, upper, NULL)

    def stop_flags(self, double M, bint upper=False):
        """1 where stopping is (weakly) optimal, flat in lattice order."""
        out = np.zeros(self._offset[self.horizon + 1], dtype=np.uint8)
        cdef unsigned char[::1] view = out
        if out.shape[0]:
            self._sweep(M, upper, &view[0])
        return out

    def bracket(self, double tol, bint upper=False):
        """Bisection bracket for the retirement value at which the root is
        indifferent between one more evaluation and stopping."""
        cdef double lo = 0.0, hi = self.v, mid
        if self._sweep(0.0, upper, NULL) <= 0.0:
            return 0.0, 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self._sweep(mid, upper, NULL) > mid:
                lo = mid
            else:
                hi = mid
        return lo, hi


cdef inline double _lookup(double* tab, int64_t nrow, int64_t ncol, int64_t m1, int64_t m0) nogil:
    if m1 >= nrow or m0 >= ncol:
        return NAN
    return tab[m1 * ncol + m0]


def simulate(int64_t start, int64_t n, uint64_t seed, int64_t horizon,
             double muA, double muB,
             double[::1] qH, double[::1] qL, double[::1] p0,
             double[:, ::1] scoreA, double[:, ::1] scoreB,
             double search_score, bint retire_on_tie,
             int64_t[::1] init_cat, int64_t[::1] init_n1, int64_t[::1] init_n0,
             double[::1] init_p, int64_t[::1] counts):
    """Run trials ``start .. n-1``; accumulate [hireA, hireB, exhausted, censored] into ``counts``.

    Scores: NaN = not yet tabulated, +inf = acceptable (hire).  Returns
    ``(n, -1, 0, 0)`` when done, else ``(trial, category, n1, n0)`` for the
    first state that needs a table entry; that trial has not been counted.
    """
    cdef int64_t k0 = init_cat.shape[0]
    cdef int64_t cap = k0 if k0 > 1 else 1
    cdef int64_t[::1] cat = np.zeros(cap + 1, dtype=np.int64)
    cdef int64_t[::1] c1 = np.zeros(cap + 1, dtype=np.int64)
    cdef int64_t[::1] c0 = np.zeros(cap + 1, dtype=np.int64)
    cdef int64_t[::1] arr = np.zeros(cap + 1, dtype=np.int64)
    cdef int64_t[::1] pos = np.zeros(cap + 1, dtype=np.int64)
    cdef unsigned char[::1] good = np.zeros(cap + 1, dtype=np.uint8)
    cdef double[::1] sc = np.zeros(cap + 1)
    cdef double* tabs[2]
    cdef int64_t nrows[2]
    cdef int64_t ncols[2]
    cdef uint64_t key = _mix(seed)
    cdef uint64_t state
    cdef int64_t trial, t, m, j, best, outcome, mc, arrivals
    cdef double u, s, q1
    cdef int64_t miss_trial = n, miss_cat = -1, miss_n1 = 0, miss_n0 = 0

    tabs[0] = &scoreA[0, 0]
    tabs[1] = &scoreB[0, 0]
    nrows[0] = scoreA.shape[0]
    nrows[1] = scoreB.shape[0]
    ncols[0] = scoreA.shape[1]
    ncols[1] = scoreB.shape[1]

    with nogil:
        for trial in range(start, n):
            state = _mix(key + <uint64_t>trial * GAMMA)
            m = 0
            for j in range(k0):
                cat[m] = init_cat[j]
                c1[m] = init_n1[j]
                c0[m] = init_n0[j]
                arr[m] = 0
                pos[m] = j
                state += GAMMA
                good[m] = 1 if _unit(_mix(state)) < init_p[j] else 0
                m += 1
            arrivals = 0
            outcome = 3
            t = 0
            while t < horizon:
                # score the active candidates and drop the retired ones
                j = 0
                while j < m:
                    s = _lookup(tabs[cat[j]], nrows[cat[j]], ncols[cat[j]], c1[j], c0[j])
                    if isnan(s):
                        miss_trial = trial
                        miss_cat = cat[j]
                        miss_n1 = c1[j]
                        miss_n0 = c0[j]
                        break
                    if s < search_score or (retire_on_tie and s == search_score):
                        m -= 1
                        cat[j] = cat[m]; c1[j] = c1[m]; c0[j] = c0[m]
                        arr[j] = arr[m]; pos[j] = pos[m]; good[j] = good[m]
                        continue
                    sc[j] = s
                    j += 1
                if miss_cat >= 0:
                    break
                if m == 0:
                    if muA + muB <= 0.0:
                        outcome = 2
                        break
                    state += GAMMA
                    u = _unit(_mix(state))
                    t += 1
                    if u < muA:
                        mc = 0
                    elif u < muA + muB:
                        mc = 1
                    else:
                        continue
                    cat[0] = mc
                    c1[0] = 0
                    c0[0] = 0
                    arr[0] = t
                    pos[0] = k0 + arrivals
                    arrivals += 1
                    state += GAMMA
                    good[0] = 1 if _unit(_mix(state)) < p0[mc] else 0
                    m = 1
                    continue
                best = 0
                for j in range(1, m):
                    if sc[j] > sc[best]:
                        best = j
                    elif sc[j] == sc[best]:
                        if (arr[j] < arr[best]
                                or (arr[j] == arr[best] and cat[j] < cat[best])
                                or (arr[j] == arr[best] and cat[j] == cat[best] and pos[j] < pos[best])):
                            best = j
                mc = cat[best]
                q1 = qH[mc] if good[best] else 1.0 - qL[mc]
                state += GAMMA
                u = _unit(_mix(state))
                t += 1
                if u < q1:
                    c1[best] += 1
                else:
                    c0[best] += 1
                s = _lookup(tabs[mc], nrows[mc], ncols[mc], c1[best], c0[best])
                if isnan(s):
                    miss_trial = trial
                    miss_cat = mc
                    miss_n1 = c1[best]
                    miss_n0 = c0[best]
                    break
                if s == INFINITY:
                    outcome = mc
                    break
            if miss_cat >= 0:
                break
            counts[outcome] += 1
    return miss_trial, miss_cat, miss_n1, miss_n0
