"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same arithmetic in the same order, so results agree bit for bit; only
the speed differs.
"""
from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def _unit(z: int) -> float:
    return (z >> 11) * (1.0 / 9007199254740992.0)


def _odds_to_prob(lo: float) -> float:
    if lo == math.inf:
        return 1.0
    if lo == -math.inf or math.isnan(lo):
        return 0.0
    if lo >= 0:
        return 1.0 / (1.0 + math.exp(-lo))
    e = math.exp(lo)
    return e / (1.0 + e)


class Lattice:
    def __init__(self, log_odds0, alpha, beta, qH, qL, pbar, v, delta, horizon, n1, n0):
        self.horizon = int(horizon)
        self.delta = float(delta)
        self.v = float(v)
        pr1: list[float] = []
        post: list[float] = []
        offset = [0] * (self.horizon + 2)
        width = [0] * (self.horizon + 1)
        accv = [math.nan] * (self.horizon + 1)
        for k in range(self.horizon + 1):
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
        offset[self.horizon + 1] = len(pr1)
        self._pr1 = pr1
        self._post = post
        self._offset = offset
        self._width = width
        self._accv = accv

    @property
    def widths(self):
        return np.asarray(self._width, dtype=np.int64)

    @property
    def offsets(self):
        return np.asarray(self._offset, dtype=np.int64)

    @property
    def posteriors(self):
        return np.asarray(self._post, dtype=np.float64)

    @property
    def hire_values(self):
        return np.asarray(self._accv, dtype=np.float64)

    @property
    def prob_one(self):
        return np.asarray(self._pr1, dtype=np.float64)

    def _sweep(self, M, upper, stop):
        H = self.horizon
        width, offset, pr1, accv, delta = self._width, self._offset, self._pr1, self._accv, self.delta
        edge = self.v if (upper and self.v > M) else M
        nxt = [edge] * (width[H] + 1)
        if stop is not None:
            for i in range(width[H]):
                stop[offset[H] + i] = 1
        c = M
        for k in range(H - 1, -1, -1):
            wk, wn, off = width[k], width[k + 1], offset[k]
            cur = [0.0] * (wk + 1)
            for i in range(wk):
                p1 = pr1[off + i]
                c = 0.0
                if p1 > 0.0:
                    if i + 1 < wn:
                        c = c + p1 * delta * nxt[i + 1]
                    else:
                        c = c + p1 * accv[k + 1]
                if p1 < 1.0:
                    if i < wn:
                        c = c + (1.0 - p1) * delta * nxt[i]
                    else:
                        c = c + (1.0 - p1) * accv[k + 1]
                if stop is not None:
                    stop[off + i] = 1 if c <= M else 0
                cur[i] = c if c > M else M
            nxt = cur
        return c

    def continuation(self, M, upper=False):
        return self._sweep(float(M), bool(upper), None)

    def stop_flags(self, M, upper=False):
        out = np.zeros(self._offset[self.horizon + 1], dtype=np.uint8)
        if out.shape[0]:
            self._sweep(float(M), bool(upper), out)
        return out

    def bracket(self, tol, upper=False):
        lo, hi = 0.0, self.v
        if self._sweep(0.0, upper, None) <= 0.0:
            return 0.0, 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self._sweep(mid, upper, None) > mid:
                lo = mid
            else:
                hi = mid
        return lo, hi


def _lookup(tab, m1, m0):
    if m1 >= tab.shape[0] or m0 >= tab.shape[1]:
        return math.nan
    return float(tab[m1, m0])


def simulate(start, n, seed, horizon, muA, muB, qH, qL, p0, scoreA, scoreB,
             search_score, retire_on_tie, init_cat, init_n1, init_n0, init_p, counts):
    tabs = (scoreA, scoreB)
    key = _mix(int(seed) & MASK)
    k0 = len(init_cat)
    for trial in range(start, n):
        state = _mix((key + trial * GAMMA) & MASK)
        active = []  # [cat, n1, n0, arrival, position, good]
        for j in range(k0):
            state = (state + GAMMA) & MASK
            good = _unit(_mix(state)) < init_p[j]
            active.append([int(init_cat[j]), int(init_n1[j]), int(init_n0[j]), 0, j, good])
        arrivals = 0
        outcome = 3
        t = 0
        while t < horizon:
            kept = []
            for cand in active:
                s = _lookup(tabs[cand[0]], cand[1], cand[2])
                if math.isnan(s):
                    return trial, cand[0], cand[1], cand[2]
                if s < search_score or (retire_on_tie and s == search_score):
                    continue
                kept.append((s, cand))
            # the compiled loop swap-removes; order is irrelevant for the argmax below
            active = [cand for _, cand in kept]
            if not active:
                if muA + muB <= 0.0:
                    outcome = 2
                    break
                state = (state + GAMMA) & MASK
                u = _unit(_mix(state))
                t += 1
                if u < muA:
                    mc = 0
                elif u < muA + muB:
                    mc = 1
                else:
                    continue
                state = (state + GAMMA) & MASK
                good = _unit(_mix(state)) < p0[mc]
                active = [[mc, 0, 0, t, k0 + arrivals, good]]
                arrivals += 1
                continue
            _, best = min(kept, key=lambda sc: (-sc[0], sc[1][3], sc[1][0], sc[1][4]))
            mc = best[0]
            q1 = qH[mc] if best[5] else 1.0 - qL[mc]
            state = (state + GAMMA) & MASK
            u = _unit(_mix(state))
            t += 1
            if u < q1:
                best[1] += 1
            else:
                best[2] += 1
            s = _lookup(tabs[mc], best[1], best[2])
            if math.isnan(s):
                return trial, mc, best[1], best[2]
            if s == math.inf:
                outcome = mc
                break
        counts[outcome] += 1
    return n, -1, 0, 0
