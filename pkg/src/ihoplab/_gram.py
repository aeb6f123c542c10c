"""Pairwise co-occurrence counts between boolean rows.

The gram matrix of an incidence matrix drives every volume statistic in the
package, so it gets a hot kernel: bitset rows ANDed word by word with a SWAR
popcount.  The numpy twin multiplies float32 copies of the boolean matrix,
which is exact for counts below 2**24.
"""

import numpy as np

from ._backend import use_numba
from .model import pack_bool_rows

_CHUNK = 1024  # row block for the matmul path, bounds the float32 copies


def gram_counts(mat: np.ndarray) -> np.ndarray:
    """Return G with G[a, b] = number of columns where rows a and b are both
    set, as float64 (the counts are exact integers)."""
    mat = np.asarray(mat, dtype=bool)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d boolean matrix")
    if mat.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.float64)
    if use_numba():
        from . import _gram_numba

        packed = pack_bool_rows(mat)
        out = np.zeros((mat.shape[0], mat.shape[0]), dtype=np.float64)
        _gram_numba.popcount_gram(packed, out)
        return out
    return _gram_numpy(mat)


def _gram_numpy(mat: np.ndarray) -> np.ndarray:
    rows = mat.shape[0]
    if mat.shape[1] >= (1 << 24):
        raise ValueError("matmul gram path is exact only below 2**24 columns")
    out = np.empty((rows, rows), dtype=np.float64)
    matf = mat.astype(np.float32)
    for start in range(0, rows, _CHUNK):
        stop = min(start + _CHUNK, rows)
        out[start:stop] = matf[start:stop] @ matf.T
    return out
