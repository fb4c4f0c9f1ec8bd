#!/usr/bin/env python3
"""Regenerate data/ordinates/S<n>.txt (first-octant level-symmetric nodes).

mu1 starts from the published LQn values and, for n <= 10, is refined to the
root that makes all even moment equations up to degree n consistent. Class
weights are the least-squares solution of those equations (degree <= 10 for
n = 12), scaled so that the full set sums to 4*pi.
"""
import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
MU1 = {4: "0.3500212", 6: "0.2666355", 8: "0.2182179", 10: "0.1893213", 12: "0.1672126"}


def exact(a, b, c):
    g = mp.gamma
    return 2 * g(mp.mpf(a + 1) / 2) * g(mp.mpf(b + 1) / 2) * g(mp.mpf(c + 1) / 2) / g(mp.mpf(a + b + c + 3) / 2)


def layout(n, m):
    M = n // 2
    d = 2 * (1 - 3 * m * m) / (n - 2)
    mus = [mp.sqrt(m * m + i * d) for i in range(M)]
    pts = [(i, j, k) for i in range(M) for j in range(M) for k in range(M) if i + j + k == M - 1]
    classes = sorted(set(tuple(sorted(p)) for p in pts))
    return mus, pts, classes


def system(n, m, deg):
    mus, pts, classes = layout(n, m)
    rows, rhs = [], []
    for a in range(0, deg + 1, 2):
        for b in range(0, deg + 1 - a, 2):
            for c in range(0, deg + 1 - a - b, 2):
                rows.append([sum(mus[p[0]] ** a * mus[p[1]] ** b * mus[p[2]] ** c
                                 for p in pts if tuple(sorted(p)) == cl) for cl in classes])
                rhs.append(exact(a, b, c) / 8)
    return mp.matrix(rows), mp.matrix(rhs)


def weights(n, m, deg):
    A, r = system(n, m, deg)
    w = mp.lu_solve(A.T * A, A.T * r)
    return w, sum(x ** 2 for x in (A * w - r))


def octant(n):
    if n == 2:
        s = 1 / mp.sqrt(3)
        return [(s, s, s, mp.pi / 2)]
    m = mp.mpf(MU1[n])
    deg = min(n, 10)
    if n <= 10:
        m = mp.findroot(lambda x: mp.diff(lambda y: weights(n, y, deg)[1], x), m)
    w, _ = weights(n, m, deg)
    mus, pts, classes = layout(n, m)
    rows = [(mus[i], mus[j], mus[k], w[classes.index(tuple(sorted((i, j, k))))]) for i, j, k in pts]
    scale = 4 * mp.pi / (8 * sum(r[3] for r in rows))
    return [(a, b, c, wt * scale) for a, b, c, wt in rows]


def main(outdir):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for n in (2, 4, 6, 8, 10, 12):
        lines = [f"# level-symmetric S{n}, first octant: s1 s2 s3 w (weights sum to 4*pi over all octants)", f"{n}"]
        lines += [" ".join(mp.nstr(v, 16, min_fixed=-1, max_fixed=1) for v in row) for row in octant(n)]
        (out / f"S{n}.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/ordinates")
