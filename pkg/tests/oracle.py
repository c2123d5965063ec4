"""Brute-force reference for the evaluator.

Matching is recomputed by enumerating every gold x generated element pair
with explicit loops; no set algebra from the evaluator is reused.  Scores
follow the metric definitions literally.
"""

from collections import Counter

from nomad.core import normalize_name as norm


def classes(gold, gen):
    out = set()
    for g in gold.classes:
        for m in gen.classes:
            if norm(g.name) == norm(m.name):
                out.add(norm(g.name))
    return out


def attributes(gold, gen):
    matched = classes(gold, gen)
    out = set()
    for g in gold.classes:
        if norm(g.name) not in matched:
            continue
        for m in gen.classes:
            if norm(m.name) != norm(g.name):
                continue
            for a in g.attributes:
                for b in m.attributes:
                    if norm(a.name) == norm(b.name):
                        out.add((norm(g.name), norm(a.name)))
    return out


def _triple(r):
    return (norm(r.source), norm(r.target), r.kind)


def _connected(r, q):
    a, b = norm(r.source), norm(r.target)
    c, d = norm(q.source), norm(q.target)
    return (a == c and b == d) or (a == d and b == c)


def hard(gold, gen):
    out = set()
    for g in gold.relationships:
        for m in gen.relationships:
            if _triple(g) == _triple(m):
                out.add(_triple(g))
    return out


def soft(gold, gen):
    out = set()
    for g in gold.relationships:
        for m in gen.relationships:
            if _connected(g, m):
                out.add(_triple(g))
    return out


def soft_generated(gold, gen):
    out = set()
    for m in gen.relationships:
        for g in gold.relationships:
            if _connected(m, g):
                out.add(_triple(m))
    return out


def prf(gold_n, gen_n, recall_hits, precision_hits):
    if gold_n == 0 and gen_n == 0:
        return 1.0, 1.0, 1.0
    p = precision_hits / gen_n if gen_n else 0.0
    r = recall_hits / gold_n if gold_n else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def scores(gold, gen):
    """``{dimension: (P, R, F1)}`` for the four dimensions."""
    mc = classes(gold, gen)
    gold_classes = {norm(c.name) for c in gold.classes}
    gen_classes = {norm(c.name) for c in gen.classes}
    gold_attr_n = 0
    gen_attr_n = 0
    for c in gold.classes:
        if norm(c.name) in mc:
            gold_attr_n += len({norm(a.name) for a in c.attributes})
    for c in gen.classes:
        if norm(c.name) in mc:
            gen_attr_n += len({norm(a.name) for a in c.attributes})
    ma = attributes(gold, gen)
    gold_rel_n = len({_triple(r) for r in gold.relationships})
    gen_rel_n = len(gen.relationships)
    h = hard(gold, gen)
    return {
        "classes": prf(len(gold_classes), len(gen_classes), len(mc), len(mc)),
        "attributes": prf(gold_attr_n, gen_attr_n, len(ma), len(ma)),
        "relationships_strict": prf(gold_rel_n, gen_rel_n, len(h), len(h)),
        "relationships_relaxed": prf(gold_rel_n, gen_rel_n, len(soft(gold, gen)), len(soft_generated(gold, gen))),
    }


def error_counts(gold, gen):
    """Expected taxonomy counts ``{(dimension, type): n}``."""
    mc = classes(gold, gen)
    gold_classes = {norm(c.name) for c in gold.classes}
    gen_classes = {norm(c.name) for c in gen.classes}
    gold_attrs = {(norm(c.name), norm(a.name)) for c in gold.classes for a in c.attributes if norm(c.name) in mc}
    gen_attrs = {(norm(c.name), norm(a.name)) for c in gen.classes for a in c.attributes if norm(c.name) in mc}
    ma = attributes(gold, gen)
    gold_t = {_triple(r) for r in gold.relationships}
    gen_counts = Counter(_triple(r) for r in gen.relationships)
    s, h = soft(gold, gen), hard(gold, gen)
    sg = soft_generated(gold, gen)
    return Counter(
        {
            ("Class", "Missing"): len(gold_classes) - len(mc),
            ("Class", "Extra"): len(gen_classes) - len(mc),
            ("Attribute", "Missing"): len(gold_attrs) - len(ma),
            ("Attribute", "Extra"): len(gen_attrs) - len(ma),
            ("Relationship", "Missing"): len(gold_t) - len(s),
            ("Relationship", "Misclassified"): len(s) - len(h),
            ("Relationship", "Extra"): len(set(gen_counts)) - len(sg),
            ("Relationship", "Duplicate"): sum(n - 1 for n in gen_counts.values()),
        }
    )
