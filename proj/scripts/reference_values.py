#!/usr/bin/env python3
"""Independent reference values for the C++ test suite.

Everything here is recomputed from scratch in numpy/scipy, without going
through the library under test: icosphere construction, cross-product
surface areas, cotangent stiffness / lumped mass assembly, and dense
generalized eigensolves.  The printed numbers are frozen into the unit
and acceptance tests as oracle constants.
"""
import numpy as np
from scipy.linalg import eigh

PHI = (1.0 + np.sqrt(5.0)) / 2.0


def icosahedron():
    v = np.array([
        [-1, PHI, 0], [1, PHI, 0], [-1, -PHI, 0], [1, -PHI, 0],
        [0, -1, PHI], [0, 1, PHI], [0, -1, -PHI], [0, 1, -PHI],
        [PHI, 0, -1], [PHI, 0, 1], [-PHI, 0, -1], [-PHI, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v, f


def subdivide(v, f):
    verts = [p for p in v]
    cache = {}
    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            cache[key] = len(verts)
            verts.append(0.5 * (verts[a] + verts[b]))
        return cache[key]
    out = []
    for a, b, c in f:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(out)


def icosphere(level, radius=1.0):
    v, f = icosahedron()
    for _ in range(level):
        v, f = subdivide(v, f)
    v = radius * v / np.linalg.norm(v, axis=1, keepdims=True)
    return v, f


def cross_area(v, f):
    p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1).sum()


def edge_lengths_from_positions(v, f):
    lengths = {}
    for a, b, c in f:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (min(i, j), max(i, j))
            lengths[key] = np.linalg.norm(v[i] - v[j])
    return lengths


def assemble(nv, f, lengths):
    """Cotangent stiffness and barycentric lumped mass from edge lengths."""
    L = np.zeros((nv, nv))
    M = np.zeros(nv)
    for a, b, c in f:
        la = lengths[(min(b, c), max(b, c))]
        lb = lengths[(min(c, a), max(c, a))]
        lc = lengths[(min(a, b), max(a, b))]
        s = 0.5 * (la + lb + lc)
        area = np.sqrt(s * (s - la) * (s - lb) * (s - lc))
        # cot of the angle opposite edge a: (b^2 + c^2 - a^2) / (4 area)
        cot_a = (lb**2 + lc**2 - la**2) / (4 * area)
        cot_b = (lc**2 + la**2 - lb**2) / (4 * area)
        cot_c = (la**2 + lb**2 - lc**2) / (4 * area)
        for (i, j), w in (((b, c), cot_a), ((c, a), cot_b), ((a, b), cot_c)):
            L[i, j] -= 0.5 * w
            L[j, i] -= 0.5 * w
            L[i, i] += 0.5 * w
            L[j, j] += 0.5 * w
        for i in (a, b, c):
            M[i] += area / 3.0
    return L, M


def dense_spectrum(L, M):
    return eigh(L, np.diag(M), eigvals_only=True)


def flat_torus(m, n, w=1.0, h=1.0):
    def vid(i, j):
        return (j % n) * m + (i % m)
    faces = []
    for j in range(n):
        for i in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            faces += [[a, b, c], [a, c, d]]
    faces = np.array(faces)
    dx, dy = w / m, h / n
    diag = np.hypot(dx, dy)
    lengths = {}
    for j in range(n):
        for i in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            for (p, q), l in (((a, b), dx), ((b, c), dy), ((a, c), diag),
                              ((c, d), dx), ((a, d), dy)):
                lengths[(min(p, q), max(p, q))] = l
    return m * n, faces, lengths


def report(tag, value):
    print(f"{tag:<46} {value!r}")


def main():
    np.set_printoptions(precision=17)

    # --- icosphere counts and embedded areas ---
    for s in range(4):
        v, f = icosphere(s)
        ne = len(edge_lengths_from_positions(v, f))
        report(f"icosphere({s}) V,E,F", (len(v), ne, len(f)))
        report(f"icosphere({s}) cross-product area", cross_area(v, f))
    report("4*pi", 4 * np.pi)

    # --- tetrahedron spectrum: expect {0, 16/3 x3} ---
    tv = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / (2 * np.sqrt(2))
    tf = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
    tl = edge_lengths_from_positions(tv, tf)
    report("tetra edge length (should be 1)", sorted(set(round(x, 15) for x in tl.values())))
    L, M = assemble(4, tf, tl)
    report("tetra off-diagonal (expect -1/sqrt(3))", L[0, 1])
    report("tetra mass entry (expect sqrt(3)/4)", M[0])
    report("tetra spectrum", dense_spectrum(L, M))
    report("16/3", 16.0 / 3.0)

    # --- icosphere(1): lambda_1 cluster of 3 ---
    v, f = icosphere(1)
    L, M = assemble(len(v), f, edge_lengths_from_positions(v, f))
    ev = dense_spectrum(L, M)
    report("icosphere(1) ev[0:5]", ev[:5])
    spread = (ev[3] - ev[1]) / ev[1]
    report("icosphere(1) cluster rel spread", spread)

    # --- icosphere(2) / icosphere(3): lambda1 at radius 1 and rescaled to 4pi ---
    for s in (2, 3):
        v, f = icosphere(s)
        L, M = assemble(len(v), f, edge_lengths_from_positions(v, f))
        ev = dense_spectrum(L, M)
        area = M.sum()
        report(f"icosphere({s}) lumped area", area)
        report(f"icosphere({s}) lambda1 (radius 1)", ev[1])
        # conformal rescale to area 4pi multiplies lambda by area/(4pi)
        report(f"icosphere({s}) lambda1 (area 4pi)", ev[1] * area / (4 * np.pi))

    # --- flat tori ---
    for m, n in ((4, 4), (8, 8), (16, 16)):
        nv, faces, lengths = flat_torus(m, n)
        ne = len(lengths)
        report(f"torus {m}x{n} V,E,F", (nv, ne, len(faces)))
        L, M = assemble(nv, faces, lengths)
        ev = dense_spectrum(L, M)
        report(f"torus {m}x{n} total area", M.sum())
        report(f"torus {m}x{n} ev[0:4]", ev[:4])
        report(f"torus {m}x{n} lambda1", ev[1])
    report("4*pi^2", 4 * np.pi**2)


if __name__ == "__main__":
    main()
