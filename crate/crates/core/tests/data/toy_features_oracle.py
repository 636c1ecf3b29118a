"""Independent oracle for the toy-corpus feature vectors.

Reads the committed preprocessing stages (toy_processed.jsonl) and the toy
embeddings, recomputes all 42 features with numpy/scipy/networkx and plain
Python, and writes toy_features_oracle.tsv in the feature-matrix format.

    python3 toy_features_oracle.py
"""

import difflib
import json
import math
import sys
from functools import lru_cache
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.spatial import distance
from scipy.stats import kurtosis, skew

HERE = Path(__file__).parent
sys.setrecursionlimit(10000)


def edit_distance(a, b):
    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return go(i + 1, j + 1)
        return 1 + min(go(i + 1, j), go(i, j + 1), go(i + 1, j + 1))

    return go(0, 0)


def lev_ratio(a, b):
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def partial(a, b):
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    if not short:
        return 1.0 if not long_ else 0.0
    n = len(short)
    return max(lev_ratio(short, long_[i:i + n]) for i in range(len(long_) - n + 1))


def token_set(t1, t2):
    s1, s2 = set(t1), set(t2)
    common = sorted(s1 & s2)
    t0 = " ".join(common)
    e1 = " ".join(common + sorted(s1 - s2)).strip()
    e2 = " ".join(common + sorted(s2 - s1)).strip()
    return max(lev_ratio(t0, e1), lev_ratio(t0, e2), lev_ratio(e1, e2))


def lcs(a, b):
    m = difflib.SequenceMatcher(None, a, b, autojunk=False).find_longest_match(0, len(a), 0, len(b))
    return m.size


def frac(num, den, both_empty):
    if both_empty:
        return 1.0
    return 0.0 if den == 0 else num / den


def lexical(q1, q2):
    t1, t2 = q1["tokens"], q2["tokens"]
    n1, n2 = len(t1), len(t2)
    s1, s2 = set(t1), set(t2)
    common = len(s1 & s2)
    both = not s1 and not s2
    j1, j2 = " ".join(t1), " ".join(t2)
    return [
        n1, n2, abs(n1 - n2), frac(min(n1, n2), max(n1, n2), n1 == 0 and n2 == 0),
        len(q1["raw"].strip()), len(q2["raw"].strip()),
        common, frac(common, len(s1 | s2), both), frac(2 * common, len(s1) + len(s2), both),
        frac(common, min(len(s1), len(s2)), both),
        float(t1[:1] == t2[:1]), float(t1[-1:] == t2[-1:]),
        lev_ratio(j1, j2), partial(j1, j2),
        lev_ratio(" ".join(sorted(t1)), " ".join(sorted(t2))),
        token_set(t1, t2),
        frac(lcs(j1, j2), min(len(j1), len(j2)), not j1 and not j2),
    ]


class Idf:
    def __init__(self, docs):
        self.n = len(docs)
        self.df = {}
        for d in docs:
            for t in set(d):
                self.df[t] = self.df.get(t, 0) + 1

    def __call__(self, t):
        return math.log((self.n + 1) / (self.df.get(t, 0) + 1)) + 1


def tfidf(s1, s2, idf):
    vocab = sorted(set(s1) | set(s2))
    if not vocab:
        return [0.0, 0.0, 0.0, 1.0]

    def vec(s):
        v = np.array([s.count(t) * idf(t) for t in vocab], dtype=float)
        n = np.linalg.norm(v)
        return v / n if n > 0 else v

    a, b = vec(s1), vec(s2)
    if np.array_equal(a, b):
        cos = 0.0
    elif not s1 or not s2:
        cos = 1.0
    else:
        cos = min(max(distance.cosine(a, b), 0.0), 1.0)
    shared = sum(idf(t) for t in vocab if t in s1 and t in s2)
    return [cos, np.abs(a - b).sum(), np.linalg.norm(a - b), shared / sum(idf(t) for t in vocab)]


def rwmd(t1, t2, table):
    def bag(t):
        words = sorted({w for w in t if w in table})
        weights = np.array([t.count(w) for w in words], dtype=float)
        return np.array([table[w] for w in words]), weights / max(weights.sum(), 1)

    x1, w1 = bag(t1)
    x2, w2 = bag(t2)
    if len(w1) == 0 or len(w2) == 0:
        return 0.0
    d = distance.cdist(x1, x2)
    return max(float(w1 @ d.min(axis=1)), float(w2 @ d.min(axis=0)))


def mean_vec(tokens, table, weights=None):
    rows, ws = [], []
    for i, t in enumerate(tokens):
        if t in table:
            rows.append(table[t])
            ws.append(1.0 if weights is None else weights[i])
    if not rows or sum(ws) == 0:
        return np.zeros(DIM)
    return np.average(np.array(rows), axis=0, weights=np.array(ws))


def guarded(f, u, v, zero_value=1.0):
    if np.array_equal(u, v):
        return 0.0
    if not u.any() or not v.any():
        return zero_value
    r = f(u, v)
    return zero_value if math.isnan(r) else r


def moment(f, u):
    if not u.any() or np.all(u == u[0]):
        return 0.0
    return float(f(u))


def embedding(q1, q2, table, idf):
    u = mean_vec(q1["tokens_no_stop"], table)
    v = mean_vec(q2["tokens_no_stop"], table)
    uw = mean_vec(q1["tokens_no_stop"], table, [idf(s) for s in q1["stems"]])
    vw = mean_vec(q2["tokens_no_stop"], table, [idf(s) for s in q2["stems"]])
    canb = distance.canberra(u, v) if (u.any() or v.any()) else 0.0
    return [
        guarded(distance.cosine, u, v),
        distance.cityblock(u, v),
        distance.euclidean(u, v),
        distance.minkowski(u, v, 3),
        canb,
        guarded(distance.braycurtis, u, v),
        guarded(distance.correlation, u, v),
        guarded(distance.cosine, uw, vw),
        distance.cityblock(uw, vw),
        distance.euclidean(uw, vw),
        guarded(distance.braycurtis, uw, vw),
        moment(lambda x: skew(x, bias=True), u),
        moment(lambda x: skew(x, bias=True), v),
        moment(lambda x: kurtosis(x, fisher=True, bias=True), u),
        moment(lambda x: kurtosis(x, fisher=True, bias=True), v),
    ]


def graph_block(g, a, b):
    if a not in g or b not in g:
        return [0, 0, 0, 0.0]
    n1 = set(g.neighbors(a)) - {b}
    n2 = set(g.neighbors(b)) - {a}
    union = n1 | n2
    d1, d2 = g.degree(a), g.degree(b)
    return [len(n1 & n2), min(d1, d2), max(d1, d2), len(n1 & n2) / len(union) if union else 0.0]


def main():
    global DIM
    table = {}
    for line in (HERE / "toy_embeddings.txt").read_text().splitlines():
        word, *vals = line.split()
        table[word] = np.array([float(x) for x in vals])
    DIM = len(next(iter(table.values())))

    pairs = [json.loads(l) for l in (HERE / "toy_processed.jsonl").read_text().splitlines()]
    idf = Idf([p[k]["stems"] for p in pairs for k in ("q1_stages", "q2_stages")])
    g = nx.Graph()
    for p in pairs:
        a, b = p["q1_stages"]["raw"], p["q2_stages"]["raw"]
        g.add_node(a)
        g.add_node(b)
        if a != b:
            g.add_edge(a, b)

    names = [json.loads(l)["name"] for l in (HERE.parent.parent / "data/feature_catalog_v1.jsonl").read_text().splitlines()]
    out = [f"# dupq-features catalog=catalog_v1 dataset=toy split=all rows={len(pairs)}", "\t".join(names + ["label"])]
    for p in pairs:
        q1, q2 = p["q1_stages"], p["q2_stages"]
        row = (
            lexical(q1, q2)
            + tfidf(q1["stems"], q2["stems"], idf)
            + [rwmd(q1["tokens"], q2["tokens"], table), rwmd(q1["tokens_no_stop"], q2["tokens_no_stop"], table)]
            + embedding(q1, q2, table, idf)
            + graph_block(g, q1["raw"], q2["raw"])
        )
        assert len(row) == 42
        out.append("\t".join(repr(float(x)) for x in row) + f"\t{p['label']}")
    (HERE / "toy_features_oracle.tsv").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
