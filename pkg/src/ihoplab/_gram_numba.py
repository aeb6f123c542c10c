"""numba kernel for the packed-bitset gram matrix."""

import numpy as np
from numba import njit

M1 = np.uint64(0x5555555555555555)
M2 = np.uint64(0x3333333333333333)
M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
H01 = np.uint64(0x0101010101010101)
S1 = np.uint64(1)
S2 = np.uint64(2)
S4 = np.uint64(4)
S56 = np.uint64(56)


@njit(cache=True)
def popcount_gram(packed, out):
    rows, words = packed.shape
    for a in range(rows):
        for b in range(a, rows):
            total = np.uint64(0)
            for w in range(words):
                x = packed[a, w] & packed[b, w]
                x = x - ((x >> S1) & M1)
                x = (x & M2) + ((x >> S2) & M2)
                x = (x + (x >> S4)) & M4
                total += (x * H01) >> S56
            out[a, b] = np.float64(total)
            out[b, a] = out[a, b]
