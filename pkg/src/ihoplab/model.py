"""Shared data model: document collections, adversary observations, assignments.

Keyword and token identifiers are dense integer indices.  Keywords live in
[0, n) and index the auxiliary side, tokens live in [0, m) and index the
observed side.  An attack output is an injective map token -> keyword stored
as an integer array of length m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SCENARIOS = ("S1", "S2", "S3")


class DocumentCollection:
    """A collection of documents, each a set of keyword indices.

    Documents are stored sparsely (one sorted index array per document).  The
    dense keyword-major incidence matrix is built on demand and cached, since
    all statistics are keyword-side reductions over documents.
    """

    def __init__(self, num_keywords: int, doc_keywords):
        if num_keywords < 0:
            raise ValueError("num_keywords must be nonnegative")
        self.num_keywords = int(num_keywords)
        docs = []
        for kws in doc_keywords:
            arr = np.unique(np.asarray(kws, dtype=np.int32))
            if arr.size and (arr[0] < 0 or arr[-1] >= self.num_keywords):
                raise ValueError("keyword index out of range")
            docs.append(arr)
        self.doc_keywords = docs
        self._bool_matrix = None
        self._packed = None

    @property
    def num_docs(self) -> int:
        return len(self.doc_keywords)

    def bool_matrix(self) -> np.ndarray:
        """Keyword-major incidence, shape (num_keywords, num_docs), bool."""
        if self._bool_matrix is None:
            mat = np.zeros((self.num_keywords, self.num_docs), dtype=bool)
            for d, kws in enumerate(self.doc_keywords):
                mat[kws, d] = True
            self._bool_matrix = mat
        return self._bool_matrix

    def packed_rows(self) -> np.ndarray:
        """Incidence rows packed into uint64 words for popcount kernels."""
        if self._packed is None:
            self._packed = pack_bool_rows(self.bool_matrix())
        return self._packed

    def subset_docs(self, indices) -> "DocumentCollection":
        indices = np.asarray(indices, dtype=np.int64)
        return DocumentCollection(
            self.num_keywords, [self.doc_keywords[i] for i in indices]
        )

    def subset_keywords(self, keyword_ids) -> "DocumentCollection":
        """Restrict to the given keywords, remapping them to 0..k-1 in order."""
        keyword_ids = np.asarray(keyword_ids, dtype=np.int64)
        if keyword_ids.size != np.unique(keyword_ids).size:
            raise ValueError("duplicate keyword ids")
        remap = np.full(self.num_keywords, -1, dtype=np.int64)
        remap[keyword_ids] = np.arange(keyword_ids.size)
        docs = []
        for kws in self.doc_keywords:
            new = remap[kws]
            docs.append(new[new >= 0])
        return DocumentCollection(keyword_ids.size, docs)

    def save(self, path) -> None:
        """Line-oriented text format: a header line, then one document per line
        of space-separated keyword indices."""
        with open(path, "w") as fh:
            fh.write(f"n={self.num_keywords} N_d={self.num_docs}\n")
            for kws in self.doc_keywords:
                fh.write(" ".join(str(int(k)) for k in kws) + "\n")

    @classmethod
    def load(cls, path) -> "DocumentCollection":
        with open(path) as fh:
            header = fh.readline().strip()
            parts = dict(p.split("=", 1) for p in header.split())
            if "n" not in parts or "N_d" not in parts:
                raise ValueError(f"bad collection header: {header!r}")
            n = int(parts["n"])
            n_docs = int(parts["N_d"])
            docs = []
            for line in fh:
                line = line.strip()
                docs.append([int(t) for t in line.split()] if line else [])
        if len(docs) != n_docs:
            raise ValueError(
                f"header promises {n_docs} documents, file holds {len(docs)}"
            )
        return cls(n, docs)

    def __eq__(self, other):
        if not isinstance(other, DocumentCollection):
            return NotImplemented
        return (
            self.num_keywords == other.num_keywords
            and self.num_docs == other.num_docs
            and all(
                np.array_equal(a, b)
                for a, b in zip(self.doc_keywords, other.doc_keywords)
            )
        )


def pack_bool_rows(mat: np.ndarray) -> np.ndarray:
    """Pack the columns of a boolean matrix into uint64 words per row."""
    mat = np.asarray(mat, dtype=bool)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d boolean matrix")
    rows, cols = mat.shape
    words = max(1, (cols + 63) // 64)
    padded = np.zeros((rows, words * 64), dtype=bool)
    padded[:, :cols] = mat
    # packbits yields uint8; regroup 8 bytes per word (byte order is
    # irrelevant because the kernels only AND words and count bits)
    packed8 = np.packbits(padded, axis=1)
    return packed8.view(np.uint64).reshape(rows, words)


@dataclass
class ObservationTrace:
    """What the adversary sees for one experiment run.

    S1 exposes one access pattern per token (token_patterns).  S2 exposes the
    token sequence plus patterns; under per-query obfuscation the per-query
    patterns are kept instead and tokens may be withheld.  S3 exposes only the
    token sequence.
    """

    scenario: str
    num_docs: int
    token_patterns: np.ndarray | None = None  # (m, num_docs) bool
    query_tokens: np.ndarray | None = None  # (rho,) int
    query_patterns: np.ndarray | None = None  # (rho, num_docs) bool
    num_tokens: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.token_patterns is not None:
            self.token_patterns = np.asarray(self.token_patterns, dtype=bool)
            if self.token_patterns.shape[1] != self.num_docs:
                raise ValueError("token_patterns width != num_docs")
            self.num_tokens = self.token_patterns.shape[0]
        if self.query_tokens is not None:
            self.query_tokens = np.asarray(self.query_tokens, dtype=np.int64)
            if self.query_tokens.size:
                if self.query_tokens.min() < 0:
                    raise ValueError("negative token id")
                self.num_tokens = max(
                    self.num_tokens, int(self.query_tokens.max()) + 1
                )
        if self.query_patterns is not None:
            self.query_patterns = np.asarray(self.query_patterns, dtype=bool)
            if self.query_patterns.shape[1] != self.num_docs:
                raise ValueError("query_patterns width != num_docs")

    @property
    def query_count(self) -> int:
        if self.query_tokens is not None:
            return int(self.query_tokens.size)
        if self.query_patterns is not None:
            return int(self.query_patterns.shape[0])
        return 0


@dataclass
class SimulatedObservation:
    """An adversary trace paired with the ground truth used for scoring.

    truth maps token id -> keyword id.  Attacks never see it.
    """

    trace: ObservationTrace
    truth: np.ndarray

    def __post_init__(self):
        self.truth = np.asarray(self.truth, dtype=np.int64)


def is_injective(assign: np.ndarray) -> bool:
    assign = np.asarray(assign)
    return np.unique(assign).size == assign.size


def accuracy(assign: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of tokens mapped to their true keyword."""
    assign = np.asarray(assign, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if assign.shape != truth.shape:
        raise ValueError("assignment and truth length mismatch")
    if assign.size == 0:
        raise ValueError("empty assignment")
    return float(np.mean(assign == truth))
