"""numba kernel for the shortest-augmenting-path assignment solver."""

import numpy as np
from numba import njit


@njit(cache=True)
def augmenting_path_solve(cost):
    # cost is (nr, nc) with nr <= nc; returns col4row
    nr, nc = cost.shape
    u = np.zeros(nr)
    v = np.zeros(nc)
    col4row = np.full(nr, -1, np.int64)
    row4col = np.full(nc, -1, np.int64)
    shortest = np.empty(nc)
    path = np.empty(nc, np.int64)
    remaining = np.empty(nc, np.int64)
    scanned_rows = np.zeros(nr, np.bool_)
    scanned_cols = np.zeros(nc, np.bool_)
    for cur in range(nr):
        for j in range(nc):
            shortest[j] = np.inf
            path[j] = -1
            remaining[j] = j
            scanned_cols[j] = False
        for i in range(nr):
            scanned_rows[i] = False
        num_remaining = nc
        minval = 0.0
        i = cur
        sink = -1
        while sink == -1:
            scanned_rows[i] = True
            lowest = np.inf
            pos = -1
            best_taken = True
            for it in range(num_remaining):
                j = remaining[it]
                reduced = ((minval + cost[i, j]) - u[i]) - v[j]
                if reduced < shortest[j]:
                    shortest[j] = reduced
                    path[j] = i
                c = shortest[j]
                taken = row4col[j] != -1
                # first strict minimum wins; an unassigned column takes over
                # from an assigned one at equal cost
                if c < lowest or (c == lowest and (not taken) and best_taken):
                    lowest = c
                    pos = it
                    best_taken = taken
            minval = lowest
            j = remaining[pos]
            if row4col[j] == -1:
                sink = j
            else:
                i = row4col[j]
            scanned_cols[j] = True
            num_remaining -= 1
            remaining[pos] = remaining[num_remaining]
        u[cur] += minval
        for ip in range(nr):
            if scanned_rows[ip] and ip != cur:
                u[ip] += minval - shortest[col4row[ip]]
        for j in range(nc):
            if scanned_cols[j]:
                v[j] -= minval - shortest[j]
        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            nxt = col4row[i]
            col4row[i] = j
            if i == cur:
                break
            j = nxt
    return col4row
