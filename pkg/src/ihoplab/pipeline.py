"""Corpus preprocessing, clickstream ingestion, and synthetic generators.

Three data sources feed experiments: plain-text corpora reduced to keyword
sets per document, clickstream graphs reduced to keyword transition
matrices, and fully synthetic collections with controllable marginals and
co-occurrence.  Everything is deterministic given its inputs and seed.
"""

from __future__ import annotations

import csv
import importlib.resources
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import DocumentCollection
from .porter import porter_stem

_WORD_RE = re.compile(r"\w+")

# clickstream rows whose source is one of these pseudo-pages count as
# session entries into the destination, not page-to-page transitions
EXTERNAL_SOURCE_PREFIX = "other-"


def load_stopwords(path=None):
    """Read a stopword file (one word per line, '#' comments) into a frozenset.

    With no path, loads the English list shipped with the package.
    """
    if path is None:
        ref = importlib.resources.files("ihoplab") / "data" / "stopwords.txt"
        text = ref.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class CorpusConfig:
    """Parameters of the keyword extraction pipeline."""

    stopwords: frozenset = field(default_factory=frozenset)
    min_len: int = 3
    max_len: int = 20
    top_k: int = 3000
    # optional pre-tokenization cleanup: drop everything from this marker on
    # (mailing-list signatures and similar boilerplate)
    signature_marker: str | None = None

    def validate(self):
        if self.min_len > self.max_len:
            raise ValueError("min_len must not exceed max_len")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")


def document_stems(text, config):
    """Reduce one document to its set of keyword stems."""
    if config.signature_marker is not None:
        cut = text.find(config.signature_marker)
        if cut >= 0:
            text = text[:cut]
    stems = set()
    for word in _WORD_RE.findall(text):
        word = word.lower()
        if not word.isalpha():
            continue
        if word in config.stopwords:
            continue
        if not (config.min_len <= len(word) <= config.max_len):
            continue
        stems.add(porter_stem(word))
    return stems


def preprocess_corpus(raw_docs, config):
    """Extract keyword sets from text documents.

    Returns (keyword names, DocumentCollection).  The keyword universe is
    the config.top_k stems with the highest document frequency; ties at the
    cutoff and the output order itself are resolved by (-df, stem), so the
    result does not depend on document processing order.
    """
    config.validate()
    raw_docs = list(raw_docs)
    if not raw_docs:
        raise ValueError("empty corpus")

    doc_stems = [document_stems(text, config) for text in raw_docs]
    df = {}
    for stems in doc_stems:
        for stem in stems:
            df[stem] = df.get(stem, 0) + 1
    if not df:
        raise ValueError("corpus contains no usable words")

    ranked = sorted(df, key=lambda s: (-df[s], s))
    if config.top_k > len(ranked):
        warnings.warn(
            "top_k=%d exceeds the %d distinct stems; keeping all"
            % (config.top_k, len(ranked)),
            stacklevel=2,
        )
    keywords = ranked[: config.top_k]
    index = {stem: i for i, stem in enumerate(keywords)}

    doc_keywords = []
    for stems in doc_stems:
        ids = sorted(index[s] for s in stems if s in index)
        doc_keywords.append(np.asarray(ids, dtype=np.int32))
    return keywords, DocumentCollection(len(keywords), doc_keywords)


def read_corpus_dir(path, pattern="*.txt"):
    """Read every matching file under path (recursively) as one document.

    Files are visited in sorted path order.
    """
    from pathlib import Path

    files = sorted(Path(path).rglob(pattern))
    if not files:
        raise ValueError("no files matching %r under %s" % (pattern, path))
    return [f.read_text(encoding="utf-8", errors="replace") for f in files]


def read_corpus_lines(path):
    """Read a one-document-per-line file, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        docs = [line.rstrip("\n") for line in fh]
    return [d for d in docs if d.strip()]


class TransitionGraph:
    """Directed weighted click graph plus external-entry counts per node."""

    def __init__(self, out_edges, external):
        self.out = {src: dict(dsts) for src, dsts in out_edges.items()}
        self.external = dict(external)
        nodes = set(self.out)
        for dsts in self.out.values():
            nodes.update(dsts)
        nodes.update(self.external)
        self.nodes = nodes
        for src, dsts in self.out.items():
            for dst, cnt in dsts.items():
                if cnt < 0:
                    raise ValueError(
                        "negative edge weight %r -> %r" % (src, dst)
                    )
        for node, cnt in self.external.items():
            if cnt < 0:
                raise ValueError("negative external count for %r" % (node,))

    def neighbor_map(self):
        """Undirected adjacency: node -> set of distinct neighbors."""
        nbrs = {node: set() for node in self.nodes}
        for src, dsts in self.out.items():
            for dst, cnt in dsts.items():
                if cnt > 0 and src != dst:
                    nbrs[src].add(dst)
                    nbrs[dst].add(src)
        return nbrs


def load_click_graph(path):
    """Parse a clickstream TSV (src<TAB>dst<TAB>count) into a TransitionGraph.

    Rows whose source starts with 'other-' are session entries and feed the
    external-entry count of the destination node.
    """
    out = {}
    external = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    "line %d: expected src<TAB>dst<TAB>count" % lineno
                )
            src, dst, raw = parts
            try:
                cnt = float(raw)
            except ValueError:
                raise ValueError(
                    "line %d: bad count %r" % (lineno, raw)
                ) from None
            if cnt < 0:
                raise ValueError("line %d: negative count" % lineno)
            if src.startswith(EXTERNAL_SOURCE_PREFIX):
                external[dst] = external.get(dst, 0.0) + cnt
            else:
                out.setdefault(src, {})
                out[src][dst] = out[src].get(dst, 0.0) + cnt
    return TransitionGraph(out, external)


def build_markov_from_graph(graph, universe, restart_prob=0.05):
    """Turn click counts over a keyword universe into a transition matrix.

    Column i mixes the normalized out-click profile of universe[i] with the
    external-entry distribution p_other at weight restart_prob.  Nodes with
    no out-clicks inside the universe get column p_other outright.
    """
    universe = list(universe)
    n = len(universe)
    missing = [u for u in universe if u not in graph.nodes]
    if missing:
        raise ValueError("universe nodes missing from graph: %r" % missing[:5])
    if not 0 <= restart_prob <= 1:
        raise ValueError("restart_prob must lie in [0, 1]")
    index = {label: i for i, label in enumerate(universe)}

    p_other = np.zeros(n)
    for label, i in index.items():
        p_other[i] = graph.external.get(label, 0.0)
    total = p_other.sum()
    if total <= 0:
        raise ValueError("no external-entry mass on the universe")
    p_other /= total

    trans = np.zeros((n, n))
    for i, label in enumerate(universe):
        col = np.zeros(n)
        for dst, cnt in graph.out.get(label, {}).items():
            j = index.get(dst)
            if j is not None:
                col[j] += cnt
        mass = col.sum()
        if mass > 0:
            trans[:, i] = (1.0 - restart_prob) * (col / mass) \
                + restart_prob * p_other
        else:
            trans[:, i] = p_other
    return trans


def select_universe_from_graph(graph, category_nodes, n):
    """Pick an n-node keyword universe centered on a category.

    Degree here means distinct-neighbor count (either edge direction) within
    the current candidate set.  The procedure: drop all nodes of degree <= 1
    in one pass, prune smallest-degree nodes while the set exceeds n, grow
    from outside nodes with the most edges into the set while it is short of
    n, then keep swapping the weakest inside node for the best-connected
    outside node while the inside degree is <= 1 or trails the outside
    score by more than 2.  All ties break on label order.
    """
    if len(graph.nodes) < n:
        raise ValueError(
            "graph has %d nodes, need %d" % (len(graph.nodes), n)
        )
    nbrs = graph.neighbor_map()
    current = {v for v in category_nodes if v in graph.nodes}

    def deg(v, members):
        return len(nbrs[v] & members)

    current -= {v for v in current if deg(v, current) <= 1}

    while len(current) > n:
        victim = min(current, key=lambda v: (deg(v, current), v))
        current.remove(victim)

    outside = graph.nodes - current
    while len(current) < n:
        best = min(outside, key=lambda v: (-deg(v, current), v))
        outside.remove(best)
        current.add(best)

    # swap loop can oscillate on adversarial graphs; cap it
    for _ in range(10 * n + 100):
        if not outside:
            break
        k_big = min(outside, key=lambda v: (-deg(v, current), v))
        s_big = deg(k_big, current)
        k_cat = min(current, key=lambda v: (deg(v, current), v))
        s_cat = deg(k_cat, current)
        if s_cat <= 1 or s_cat < s_big - 2:
            current.remove(k_cat)
            outside.add(k_cat)
            outside.remove(k_big)
            current.add(k_big)
        else:
            break
    return sorted(current)


def load_frequency_table(path):
    """Read a CSV of per-period keyword frequencies.

    Header is `keyword,period_1,...`; returns (names, matrix of shape
    (n_keywords, n_periods)).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty frequency table") from None
        if not header or header[0].strip().lower() != "keyword":
            raise ValueError("first column must be 'keyword'")
        width = len(header)
        if width < 2:
            raise ValueError("need at least one period column")
        names = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValueError("line %d: expected %d columns" % (lineno, width))
            name = row[0].strip()
            if name in names:
                raise ValueError("line %d: duplicate keyword %r" % (lineno, name))
            try:
                values = [float(x) for x in row[1:]]
            except ValueError:
                raise ValueError("line %d: non-numeric frequency" % lineno) from None
            if any(v < 0 for v in values):
                raise ValueError("line %d: negative frequency" % lineno)
            names.append(name)
            rows.append(values)
    if not names:
        raise ValueError("frequency table has no rows")
    return names, np.asarray(rows, dtype=np.float64)


def split_halves(table):
    """Average the first and second half of the period columns separately.

    Returns (aux_freq, real_freq), each normalized to sum 1.  A single
    period serves as both halves.
    """
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[1] < 1:
        raise ValueError("table must be 2-d with at least one column")
    k = table.shape[1]
    mid = (k + 1) // 2
    first = table[:, :mid].mean(axis=1)
    second = table[:, mid:].mean(axis=1) if k > 1 else first.copy()

    def normalize(v, which):
        s = v.sum()
        if s <= 0:
            raise ValueError("%s half has zero total frequency" % which)
        return v / s

    return normalize(first, "first"), normalize(second, "second")


NUM_TOPICS = 8


def generate_synthetic(n, num_docs, zipf_exponent=1.0,
                       co_occurrence_mixing=0.5, avg_doc_len=None, seed=0):
    """Generate a random document collection with Zipf keyword marginals.

    Keyword i has base popularity q_i proportional to (i+1)^-zipf_exponent
    and a random topic-affinity vector w_i (Dirichlet over NUM_TOPICS
    topics, summing to 1).  Each document draws one topic t uniformly and
    includes keyword i independently with probability

        clip(avg_doc_len * q_i * ((1-mixing) + mixing * K * w_i[t]), 0, 0.95)

    Averaging the bracket over t gives exactly 1, so marginals follow the
    Zipf law (up to clipping) at any mixing level, while mixing > 0 makes
    keywords with similar affinities co-occur more than independence
    predicts.  The affinity vectors give every keyword its own
    co-occurrence fingerprint, the structure recovery attacks feed on; a
    deterministic topic partition would leave same-topic keywords with
    near-equal marginals statistically interchangeable.
    """
    if n < 1 or num_docs < 1:
        raise ValueError("need at least one keyword and one document")
    if not 0 <= co_occurrence_mixing <= 1:
        raise ValueError("co_occurrence_mixing must lie in [0, 1]")
    if zipf_exponent < 0:
        raise ValueError("zipf_exponent must be nonnegative")
    if avg_doc_len is None:
        avg_doc_len = max(10.0, min(60.0, n / 4.0))
    if avg_doc_len <= 0:
        raise ValueError("avg_doc_len must be positive")

    rng = np.random.default_rng(seed)
    q = zipf_frequencies(n, zipf_exponent)
    affinity = rng.dirichlet(np.full(NUM_TOPICS, 0.5), size=n)  # (n, K)
    # probability table: row t = inclusion probabilities under topic t
    boost = (1.0 - co_occurrence_mixing) \
        + co_occurrence_mixing * NUM_TOPICS * affinity.T
    probs = np.clip(avg_doc_len * q[None, :] * boost, 0.0, 0.95)

    doc_topics = rng.integers(0, NUM_TOPICS, size=num_docs)
    doc_keywords = []
    chunk = 2048
    for start in range(0, num_docs, chunk):
        stop = min(start + chunk, num_docs)
        block = rng.random((stop - start, n)) < probs[doc_topics[start:stop]]
        for row in block:
            doc_keywords.append(np.flatnonzero(row).astype(np.int32))
    return DocumentCollection(n, doc_keywords)


def zipf_frequencies(n, exponent=1.0):
    """Zipf-law probability vector: f_i proportional to (i+1)^-exponent."""
    if n < 1:
        raise ValueError("n must be positive")
    f = (np.arange(1, n + 1, dtype=np.float64)) ** (-float(exponent))
    return f / f.sum()


def make_cycle_chain(n, advance_prob=0.9):
    """Transition matrix that walks a cycle: from state i, go to i+1 mod n
    with advance_prob, otherwise jump uniformly.  Stationary law is uniform,
    so all states are equally popular while consecutive queries correlate.
    """
    if n < 2:
        raise ValueError("cycle needs at least 2 states")
    if not 0 <= advance_prob <= 1:
        raise ValueError("advance_prob must lie in [0, 1]")
    trans = np.full((n, n), (1.0 - advance_prob) / n)
    for i in range(n):
        trans[(i + 1) % n, i] += advance_prob
    return trans


def make_skewed_cycle_chain(n, lo_advance=0.5, hi_advance=0.9):
    """Cycle walk whose advance probability grows linearly from lo_advance at
    state 0 to hi_advance at state n-1 (jumps are uniform otherwise).

    A uniform-advance cycle is rotation symmetric: relabeling every state one
    step around the cycle preserves the law exactly, so no attack can beat
    1/n up to rotation.  The skew keeps the strong correlation but makes
    states statistically distinct.
    """
    if n < 2:
        raise ValueError("cycle needs at least 2 states")
    if not 0 <= lo_advance <= hi_advance <= 1:
        raise ValueError("need 0 <= lo_advance <= hi_advance <= 1")
    p = np.linspace(lo_advance, hi_advance, n)
    trans = np.empty((n, n))
    for i in range(n):
        trans[:, i] = (1.0 - p[i]) / n
        trans[(i + 1) % n, i] += p[i]
    return trans


def make_iid_chain(freqs):
    """Memoryless chain: every column equals the stationary law freqs."""
    f = np.asarray(freqs, dtype=np.float64)
    if f.ndim != 1 or f.size < 1 or np.any(f < 0):
        raise ValueError("freqs must be a nonnegative vector")
    s = f.sum()
    if not np.isclose(s, 1.0, atol=1e-9):
        raise ValueError("freqs must sum to 1")
    return np.tile((f / s)[:, None], (1, f.size))
