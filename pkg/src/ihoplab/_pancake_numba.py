"""numba kernel for the replica-and-dummy query transcript."""

import numpy as np
from numba import njit


@njit(cache=True)
def protocol(
    query_seq,
    cum_real,
    cum_dummy,
    slot_start,
    slot_list,
    draws,
    tokens,
    branches,
    real_indices,
):
    # draws has shape (num_queries, 3, 3): per emitted slot a coin draw, a
    # keyword draw and a replica draw, consumed positionally whether or not
    # the branch needs them, so any twin walking the same array agrees
    num_queries = query_seq.shape[0]
    buffer = np.empty(num_queries + 1, np.int64)
    head = 0
    tail = 0
    for r in range(num_queries):
        buffer[tail] = r
        tail += 1
        for c in range(3):
            u_coin = draws[r, c, 0]
            u_kw = draws[r, c, 1]
            u_rep = draws[r, c, 2]
            if u_coin < 0.5:
                if head < tail:
                    ridx = buffer[head]
                    head += 1
                    kw = query_seq[ridx]
                    branch = 0
                else:
                    kw = np.searchsorted(cum_real, u_kw, side="right")
                    ridx = -1
                    branch = 1
            else:
                kw = np.searchsorted(cum_dummy, u_kw, side="right")
                ridx = -1
                branch = 2
            lo = slot_start[kw]
            hi = slot_start[kw + 1]
            s = lo + int(u_rep * (hi - lo))
            if s >= hi:
                s = hi - 1
            tokens[r, c] = slot_list[s]
            branches[r, c] = branch
            real_indices[r, c] = ridx
