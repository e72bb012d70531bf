#!/usr/bin/env python3
"""Brute-force TF-IDF cosine reference for frozen test values.

Reads a corpus snapshot (one JSON document per line) and scores queries with
dense vectors over the full vocabulary. Shares nothing with the C++ code
except the stopword list, which it reads from docs/stopwords.md.

    tfidf_oracle.py SNAPSHOT "query text" [--kinds Weakness,...]
    tfidf_oracle.py SNAPSHOT --associate MODEL.graphml [--depth N]
"""
import argparse
import json
import math
import pathlib
import re
import xml.etree.ElementTree as ET

ROOT = pathlib.Path(__file__).resolve().parents[2]
WEIGHTS = {"title": 3.0, "description": 2.0, "extra_text": 1.0}
THRESHOLD = 0.05
TOP_K = 25
DECAY = 0.5


def load_stopwords():
    text = (ROOT / "docs" / "stopwords.md").read_text()
    block = text.split("```")[1]
    return set(block.split())


STOP = load_stopwords()


def tokens(text):
    return [t for t in re.split(r"[^a-z0-9]+", text.lower())
            if len(t) >= 2 and t not in STOP]


def load(snapshot):
    docs = []
    for line in pathlib.Path(snapshot).read_text().splitlines():
        if line.strip():
            docs.append(json.loads(line))
    return docs


def doc_vectors(docs):
    vocab = sorted({t for d in docs for f in WEIGHTS for t in tokens(d.get(f) or "")})
    n = len(docs)
    df = {t: sum(1 for d in docs if any(t in tokens(d.get(f) or "") for f in WEIGHTS))
          for t in vocab}
    idf = {t: math.log((n + 1) / (df[t] + 1)) + 1 for t in vocab}
    vecs = []
    for d in docs:
        tf = {t: 0.0 for t in vocab}
        for f, w in WEIGHTS.items():
            for t in tokens(d.get(f) or ""):
                tf[t] += w
        vecs.append({t: tf[t] * idf[t] for t in vocab})
    return vocab, idf, vecs


def query(docs, text, kinds=None, threshold=THRESHOLD, top_k=TOP_K):
    vocab, idf, vecs = doc_vectors(docs)
    q = {t: 0.0 for t in vocab}
    for t in tokens(text):
        if t in q:
            q[t] += idf[t]
    qn = math.sqrt(sum(v * v for v in q.values()))
    out = []
    for d, v in zip(docs, vecs):
        dot = sum(q[t] * v[t] for t in vocab)
        if qn == 0 or dot == 0:
            continue
        s = dot / (qn * math.sqrt(sum(x * x for x in v.values())))
        if kinds and d["kind"] not in kinds:
            continue
        if s >= threshold:
            out.append((d["id"], s))
    out.sort(key=lambda x: (-x[1], x[0]))
    return out[:top_k]


def associate(docs, model_path, depth):
    by_id = {d["id"]: d for d in docs}
    root = ET.parse(model_path).getroot()
    strip = lambda tag: tag.split("}")[-1]
    result = {}
    for el in root.iter():
        if strip(el.tag) not in ("node", "edge"):
            continue
        for data in el:
            key = data.get("key", "")
            if not key.startswith("attr:"):
                continue
            k = key[5:]
            direct = query(docs, k + " " + (data.text or ""))
            merged = {i: (s, None) for i, s in direct}
            for i, s in direct:
                frontier, seen = [i], {i: 0}
                for hop in range(1, depth + 1):
                    nxt = []
                    for f in frontier:
                        for r in sorted(by_id[f]["cross_refs"]):
                            if r in by_id and r not in seen:
                                seen[r] = hop
                                nxt.append(r)
                    frontier = nxt
                for r, hop in seen.items():
                    if hop == 0:
                        continue
                    cs = s * DECAY ** hop
                    if r not in merged or cs > merged[r][0]:
                        merged[r] = (cs, i)
            ranked = sorted(merged.items(), key=lambda x: (-x[1][0], x[0]))
            result[(strip(el.tag), el.get("id"), k)] = ranked
    return result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("snapshot")
    ap.add_argument("text", nargs="?")
    ap.add_argument("--kinds")
    ap.add_argument("--associate")
    ap.add_argument("--depth", type=int, default=2)
    args = ap.parse_args()
    docs = load(args.snapshot)
    if args.associate:
        for key, ranked in sorted(associate(docs, args.associate, args.depth).items()):
            print(key, len(ranked))
            for i, (s, via) in ranked:
                print(f"   {i:16s} {s:.17g} {via or ''}")
        return
    kinds = set(args.kinds.split(",")) if args.kinds else None
    for i, s in query(docs, args.text, kinds):
        print(f"{i:16s} {s:.17g}")


if __name__ == "__main__":
    main()
