#!/usr/bin/env python3
"""Writes data/rules/glb.json: the squared GLB rhombus inflation with 20
decorated prototiles (shape x rotation), Q = lambda^2 * Id, lambda = 2cos(pi/10).

Positions live in Z[xi], xi = exp(i pi/5), basis xi^0..xi^3.  Real
coordinates are written in the power basis of lambda (x^4 - 5x^2 + 5).

The decorations are the only ones (up to mirror image) giving an edge-to-edge
tiling with vertex weights 1/5 and 2/5 summing to 1.  With them every child of
an even orientation has odd orientation and vice versa, so the 20x20 matrix has
period 2 and the loader rejects the file as not primitive.
"""
import itertools
import json
import sys
from fractions import Fraction as Fr


def mulxi(v):
    a, b, c, d = v
    return (-d, a + d, b - d, c + d)


def xip(k, v=(1, 0, 0, 0)):
    for _ in range(k % 10):
        v = mulxi(v)
    return v


def add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def neg(u):
    return tuple(-x for x in u)


def kdir(v):
    return next(k for k in range(10) if xip(k) == v)


# thick rhombus: sides xi^r, xi^(r+2); thin: xi^r, xi^(r+4)
CONV = {"T": 2, "t": 4}
LABELS = {"T": (0, 1, 0, 1), "t": (0, 0, 1)}


def subst(shape, r):
    u, w = xip(r), xip(r + CONV[shape])
    zz = lambda v: [v, mulxi(v)]
    A, B = zz(u), zz(w)
    out, idx = [], 0
    for i in range(2):
        for j in range(2):
            a, b = A[i], B[j]
            d = (kdir(b) - kdir(a)) % 10
            if d in (0, 5):
                continue
            pos = (0, 0, 0, 0)
            for v in A[:i] + B[:j]:
                pos = add(pos, v)
            sh = "t" if min(d, 10 - d) in (1, 4) else "T"
            bs = CONV[sh]
            verts = [(pos, a, b), (add(pos, a), neg(a), b), (add(pos, b), a, neg(b)),
                     (add(add(pos, a), b), neg(a), neg(b))]
            cands = []
            for p, e1, e2 in verts:
                k1, k2 = kdir(e1), kdir(e2)
                if (k2 - k1) % 10 == bs:
                    cands.append((sh, k1, p))
                if (k1 - k2) % 10 == bs:
                    cands.append((sh, k2, p))
            assert len(cands) == 2
            out.append(cands[LABELS[shape][idx]])
            idx += 1
    return out


def inflate(tiles):
    res = []
    for sh, r, p in tiles:
        base = add(p, mulxi(p))  # (1 + xi) p
        for s2, r2, q in subst(sh, r):
            res.append((s2, r2, add(base, q)))
    return res


def edges_consistent(tiles):
    seen = {}
    for sh, r, p in tiles:
        u, w = xip(r), xip(r + CONV[sh])
        for s, v in ((p, u), (add(p, w), u), (p, w), (add(p, u), w)):
            e = add(s, v)
            key = frozenset([s, e])
            if seen.setdefault(key, (s, e)) != (s, e):
                return False
    return True


# xi^m as (x, y), each a vector over Q in the basis 1, lam, lam^2, lam^3
H = Fr(1, 2)
XI_XY = [
    ([1, 0, 0, 0], [0, 0, 0, 0]),
    ([-1, 0, H, 0], [0, -3 * H, 0, H]),
    ([-3 * H, 0, H, 0], [0, H, 0, 0]),
    ([3 * H, 0, -H, 0], [0, H, 0, 0]),
]
VOL = {"T": [0, H, 0, 0], "t": [0, -3 * H, 0, H]}


def fe(v):
    return [str(Fr(c)) for c in v]


def to_xy(p):
    x = [Fr(0)] * 4
    y = [Fr(0)] * 4
    for m, c in enumerate(p):
        for i in range(4):
            x[i] += c * XI_XY[m][0][i]
            y[i] += c * XI_XY[m][1][i]
    return [fe(x), fe(y)]


def main(path):
    types = [(s, r) for s in "Tt" for r in range(10)]
    ix = {t: i for i, t in enumerate(types)}
    for s, r in types:
        assert edges_consistent(inflate(inflate(inflate([(s, r, (0, 0, 0, 0))]))))
    entries = []
    for s, r in types:
        # two inflation steps give (1+xi)^2 = lambda^2 xi; pre-rotating the seed
        # by xi^-1 turns this into Q = lambda^2 Id
        for s2, r2, p in inflate(inflate([(s, (r - 1) % 10, (0, 0, 0, 0))])):
            entries.append({"i": ix[(s2, r2)], "j": ix[(s, r)], "t": to_xy(p)})
    entries.sort(key=lambda e: (e["j"], e["i"], e["t"]))
    doc = {
        "name": "glb",
        "description": "Candidate Godreche-Lancon-Billard rhombus inflation, squared so that Q = lambda^2 Id; "
                       "ten orientations per rhombus. The matrix has period 2, so it is rejected as not primitive",
        "kind": "planar",
        "alphabet": [f"{s}{r}" for s, r in types],
        "min_poly": ["5", "0", "-5", "0", "1"],
        "geometry": {
            "dim": 2,
            "volumes": [fe(VOL[s]) for s, _ in types],
            "Q": [[fe([0, 0, 1, 0]), fe([0, 0, 0, 0])], [fe([0, 0, 0, 0]), fe([0, 0, 1, 0])]],
            "module_basis": [[fe(x), fe(y)] for x, y in XI_XY],
            "control_points": "marked rhombus vertex (thick: acute corner side pair xi^r, xi^(r+2); "
                              "thin: obtuse corner side pair xi^r, xi^(r+4))",
            "T": entries,
        },
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/rules/glb.json")
