"""Compiled inner loops for the heat-bath chain."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def heat_bath_sweeps(ei, ej, lengths, state, deg, beta, h0, h1, rand, record):
    """Run ``rand.shape[0]`` sweeps in place.

    ``rand[s, 0]`` drives the Fisher-Yates scan order of sweep ``s`` and
    ``rand[s, 1, t]`` decides the t-th update.  Rows of ``record`` (if it has
    any) receive the edge states after each sweep.
    """
    n_sweeps = rand.shape[0]
    m = rand.shape[2]
    perm = np.empty(m, np.int64)
    for s in range(n_sweeps):
        for t in range(m):
            perm[t] = t
        for t in range(m - 1, 0, -1):
            r = int(rand[s, 0, t] * (t + 1))
            if r > t:
                r = t
            tmp = perm[t]
            perm[t] = perm[r]
            perm[r] = tmp
        for t in range(m):
            q = perm[t]
            a = ei[q]
            b = ej[q]
            old = state[q]
            d1 = deg[a] - old
            d2 = deg[b] - old
            cost = lengths[q] + h1 * (d1 + d2)
            if d1 == 0:
                cost -= h0
            if d2 == 0:
                cost -= h0
            x = beta * cost
            if x > 0.0:
                ex = math.exp(-x)
                p = ex / (1.0 + ex)
            else:
                p = 1.0 / (1.0 + math.exp(x))
            new = 1 if rand[s, 1, t] < p else 0
            if new != old:
                deg[a] += new - old
                deg[b] += new - old
                state[q] = new
        if record.shape[0] > 0:
            for t in range(m):
                record[s, t] = state[t]
