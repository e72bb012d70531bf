"""Checks a surface JSON written by `cpsec analyze --surface-out` against the
dense reference implementation in tfidf_oracle.py."""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import tfidf_oracle  # noqa: E402

TOLERANCE = 1e-9


def main():
    snapshot, model, surface_path = sys.argv[1:4]
    docs = tfidf_oracle.load(snapshot)
    surface = json.load(open(surface_path, encoding="utf-8"))
    depth = surface["config"]["crossref_depth"]
    expected = tfidf_oracle.associate(docs, model, depth)
    scope_of = {"component": "node", "connection": "edge"}
    got = {
        (scope_of[a["scope"]], a["owner"], a["key"]): [(m["id"], m["score"]) for m in a["matches"]]
        for a in surface["attributes"]
    }
    failures = 0
    if set(got) != set(expected):
        print("attribute sets differ:", sorted(set(got) ^ set(expected)))
        failures += 1
    for key in sorted(set(got) & set(expected)):
        want = [(i, s) for i, (s, _via) in expected[key]]
        have = got[key]
        if [i for i, _ in want] != [i for i, _ in have]:
            print(key, "ranking differs:\n  oracle", want, "\n  cpsec ", have)
            failures += 1
            continue
        for (i, s), (_, t) in zip(want, have):
            if abs(s - t) > TOLERANCE:
                print(key, i, "score", t, "oracle", s)
                failures += 1
    print(f"{os.path.basename(model)}: {len(got)} attributes, {failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
