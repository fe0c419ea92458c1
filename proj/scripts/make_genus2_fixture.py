#!/usr/bin/env python3
"""Generate the genus-2 OFF fixture shipped under tests/fixtures/.

The surface is the boundary of a regular neighborhood of the planar
figure-eight curve x^2 (1 - x^2) = y^2, realized as the level set

    F(x, y, z) = (x^4 - x^2 + y^2)^2 + z^2 - eps^2 = 0,

which is a smooth closed orientable surface of genus 2 for 0 < eps < 1/4.
Marching cubes extracts a triangulation; tangential Laplacian smoothing with
Newton re-projection onto F = 0 improves triangle quality without shrinking
the surface. The script self-validates (closed, manifold, consistently
oriented, connected, chi = -2) and prints the frozen facts that the C++ test
suite asserts against the shipped file.

Run from the repository root:  python3 scripts/make_genus2_fixture.py
"""

import sys

import numpy as np
from skimage.measure import marching_cubes

EPS = 0.20
GRID_HXY = 0.060  # in-plane marching-cubes cell size; fine enough for the topology
GRID_HZ = 0.050   # through the thin z direction of the tube
TARGET_V = 430    # decimation target, inside the dense-oracle range (<= 500)
SMOOTH_ITERS = 25
SMOOTH_LAMBDA = 0.3
OUT_PATH = "tests/fixtures/genus2.off"


def field(x, y, z):
    g = x**4 - x**2 + y**2
    return g * g + z * z - EPS * EPS


def grad(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    g = x**4 - x**2 + y**2
    return np.stack(
        [2.0 * g * (4.0 * x**3 - 2.0 * x), 2.0 * g * (2.0 * y), 2.0 * z], axis=-1
    )


def project(points, steps=5):
    """Newton steps along the gradient back onto F = 0."""
    p = points.copy()
    for _ in range(steps):
        f = field(p[:, 0], p[:, 1], p[:, 2])
        gr = grad(p)
        norm2 = np.einsum("ij,ij->i", gr, gr)
        norm2 = np.maximum(norm2, 1e-30)
        p -= (f / norm2)[:, None] * gr
    return p


def extract():
    x = np.arange(-1.18, 1.18 + GRID_HXY, GRID_HXY)
    y = np.arange(-0.75, 0.75 + GRID_HXY, GRID_HXY)
    z = np.arange(-0.36, 0.36 + GRID_HZ, GRID_HZ)
    grid = field(x[:, None, None], y[None, :, None], z[None, None, :])
    verts, faces, _, _ = marching_cubes(grid, level=0.0,
                                        spacing=(GRID_HXY, GRID_HXY, GRID_HZ))
    verts += np.array([x[0], y[0], z[0]])
    return verts, faces.astype(np.int64)


def edge_map(faces):
    edges = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            edges.setdefault((min(u, v), max(u, v)), []).append((u, v))
    return edges


def validate(verts, faces):
    v_count = len(verts)
    f_count = len(faces)
    edges = edge_map(faces)
    e_count = len(edges)
    for key, sides in edges.items():
        if len(sides) != 2:
            raise SystemExit(f"edge {key} bounds {len(sides)} faces: not closed/manifold")
        if sides[0] == sides[1]:
            raise SystemExit(f"edge {key} traversed twice in the same direction")
    chi = v_count - e_count + f_count
    if chi != -2:
        raise SystemExit(f"Euler characteristic {chi} != -2: wrong topology")

    # connectivity
    adj = [[] for _ in range(v_count)]
    for (a, b) in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = np.zeros(v_count, bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    if not seen.all():
        raise SystemExit("mesh is not connected")

    # outward orientation: divergence-theorem volume must be positive
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    volume = np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0
    return v_count, e_count, f_count, chi, volume


def smooth(verts, faces, iters=SMOOTH_ITERS):
    """Tangential umbrella smoothing with capped steps.

    Only the component of the umbrella displacement inside the tangent plane is
    applied, and each step is capped well below the local edge length, so
    vertices cannot jump across the thin tube to the opposite sheet.
    """
    edges = edge_map(faces)
    neighbors = [[] for _ in range(len(verts))]
    for (a, b) in edges:
        neighbors[a].append(b)
        neighbors[b].append(a)
    counts = np.array([len(n) for n in neighbors], float)
    idx = np.zeros((len(verts), int(counts.max())), np.int64)
    mask = np.zeros_like(idx, bool)
    for i, n in enumerate(neighbors):
        idx[i, : len(n)] = n
        mask[i, : len(n)] = True
    p = verts.copy()
    for _ in range(iters):
        centroid = np.where(mask[..., None], p[idx], 0.0).sum(axis=1) / counts[:, None]
        d = SMOOTH_LAMBDA * (centroid - p)
        normal = grad(p)
        normal /= np.maximum(np.linalg.norm(normal, axis=1), 1e-30)[:, None]
        d -= np.einsum("ij,ij->i", d, normal)[:, None] * normal
        local = np.where(mask, np.linalg.norm(p[idx] - p[:, None, :], axis=2), np.inf)
        cap = 0.25 * local.min(axis=1)
        step = np.linalg.norm(d, axis=1)
        scale = np.minimum(1.0, cap / np.maximum(step, 1e-30))
        p += scale[:, None] * d
        p = project(p, steps=3)
    return p


def face_normal(verts, tri):
    a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
    return np.cross(b - a, c - a)


def min_angle_of(verts, tri):
    a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
    la, lb, lc = (np.linalg.norm(b - c), np.linalg.norm(c - a),
                  np.linalg.norm(a - b))
    if min(la, lb, lc) < 1e-12:
        return 0.0
    angles = []
    for (op, s1, s2) in ((la, lb, lc), (lb, lc, la), (lc, la, lb)):
        angles.append(np.arccos(np.clip((s1**2 + s2**2 - op**2) / (2 * s1 * s2), -1, 1)))
    return min(angles)


def flip_pass(verts, faces):
    """Greedy Delaunay-style flips: flip an edge when it raises the min angle."""
    faces = [list(f) for f in faces]
    edge_faces = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, v), max(u, v)), []).append(fi)
    all_edges = set(edge_faces)
    touched = set()
    flips = 0
    for key, pair in edge_faces.items():
        if len(pair) != 2 or pair[0] in touched or pair[1] in touched:
            continue
        f1, f2 = pair
        shared = set(faces[f1]) & set(faces[f2])
        if len(shared) != 2:
            continue
        u, v = sorted(shared)
        a = next(p for p in faces[f1] if p not in shared)
        b = next(p for p in faces[f2] if p not in shared)
        if (min(a, b), max(a, b)) in all_edges:
            continue
        # keep the cyclic orientation of the two replaced triangles
        i1 = faces[f1].index(a)
        u1, v1 = faces[f1][(i1 + 1) % 3], faces[f1][(i1 + 2) % 3]
        t1, t2 = [a, u1, b], [b, v1, a]
        before = min(min_angle_of(verts, faces[f1]), min_angle_of(verts, faces[f2]))
        after = min(min_angle_of(verts, t1), min_angle_of(verts, t2))
        if after <= before + 1e-9:
            continue
        # reject flips whose new triangles cut through the thin tube: their
        # normals must stay aligned with the implicit surface normal
        ok = True
        for tri in (t1, t2):
            n = face_normal(verts, tri)
            n_len = np.linalg.norm(n)
            centroid = (verts[tri[0]] + verts[tri[1]] + verts[tri[2]]) / 3.0
            s = grad(centroid[None, :])[0]
            s_len = np.linalg.norm(s)
            if n_len < 1e-14 or s_len < 1e-14 or n @ s < 0.5 * n_len * s_len:
                ok = False
                break
        if not ok:
            continue
        faces[f1], faces[f2] = t1, t2
        all_edges.discard(key)
        all_edges.add((min(a, b), max(a, b)))
        touched.update(pair)
        flips += 1
    return np.array(faces, np.int64), flips


def improve(verts, faces, rounds=30):
    """Alternate flip and smoothing passes, keeping the best configuration.

    A smoothing step is only accepted when it does not lower the global min
    angle, and the best (min angle, then min edge) state seen is returned, so
    the loop can never end worse than it started.
    """
    def score(v, f):
        mn, _, _, me = triangle_stats(v, np.asarray(f))
        return (mn, me)

    best = (score(verts, faces), verts.copy(), np.asarray(faces).copy())
    for _ in range(rounds):
        faces, flips = flip_pass(verts, faces)
        candidate = smooth(verts, faces, iters=2)
        if score(candidate, faces) >= score(verts, faces):
            verts = candidate
        current = score(verts, faces)
        if current > best[0]:
            best = (current, verts.copy(), np.asarray(faces).copy())
        if flips == 0:
            break
    return best[1], best[2]


def decimate(verts, faces, target_v):
    """Shortest-edge collapses with link-condition and normal-flip guards."""
    verts = verts.copy()
    faces = [list(f) for f in faces]
    face_alive = [True] * len(faces)
    alive = np.ones(len(verts), bool)
    v2f = [set() for _ in range(len(verts))]
    for fi, f in enumerate(faces):
        for p in f:
            v2f[p].add(fi)

    def neighbors(p):
        out = set()
        for fi in v2f[p]:
            out.update(faces[fi])
        out.discard(p)
        return out

    remaining = int(alive.sum())
    while remaining > target_v:
        pairs = set()
        for fi, ok in enumerate(face_alive):
            if not ok:
                continue
            a, b, c = faces[fi]
            pairs.update({(min(a, b), max(a, b)), (min(b, c), max(b, c)),
                          (min(c, a), max(c, a))})
        order = sorted(pairs, key=lambda e: np.sum((verts[e[0]] - verts[e[1]]) ** 2))
        touched = set()
        collapsed_any = False
        for u, v in order:
            if remaining <= target_v:
                break
            if u in touched or v in touched:
                continue
            shared = v2f[u] & v2f[v]
            if len(shared) != 2:
                continue
            opposite = set()
            for fi in shared:
                opposite.update(faces[fi])
            opposite -= {u, v}
            if neighbors(u) & neighbors(v) != opposite:
                continue  # collapse would pinch the surface
            midpoint = project(0.5 * (verts[u] + verts[v])[None, :])[0]
            moved = (v2f[u] | v2f[v]) - shared
            ok = True
            for fi in moved:
                old_n = face_normal(verts, faces[fi])
                tri = [u if p == v else p for p in faces[fi]]
                saved = verts[u].copy()
                verts[u] = midpoint
                new_n = face_normal(verts, tri)
                verts[u] = saved
                if new_n @ old_n <= 0 or np.linalg.norm(new_n) < 1e-12:
                    ok = False
                    break
            if not ok:
                continue
            verts[u] = midpoint
            for fi in shared:
                face_alive[fi] = False
                for p in faces[fi]:
                    v2f[p].discard(fi)
            for fi in v2f[v] - shared:
                faces[fi] = [u if p == v else p for p in faces[fi]]
                v2f[u].add(fi)
            v2f[v] = set()
            alive[v] = False
            touched.update({u, v} | opposite)
            remaining -= 1
            collapsed_any = True
        if not collapsed_any:
            raise SystemExit(f"decimation stalled at V = {remaining}")

    index = -np.ones(len(verts), np.int64)
    index[alive] = np.arange(int(alive.sum()))
    out_faces = np.array(
        [[index[p] for p in faces[fi]] for fi, ok in enumerate(face_alive) if ok],
        np.int64)
    return verts[alive], out_faces


def triangle_stats(verts, faces):
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    la = np.linalg.norm(b - c, axis=1)
    lb = np.linalg.norm(c - a, axis=1)
    lc = np.linalg.norm(a - b, axis=1)
    angles = []
    for (op, s1, s2) in ((la, lb, lc), (lb, lc, la), (lc, la, lb)):
        cosv = np.clip((s1**2 + s2**2 - op**2) / (2 * s1 * s2), -1, 1)
        angles.append(np.arccos(cosv))
    angles = np.stack(angles)
    area = 0.25 * np.sqrt(
        np.maximum((la + lb + lc) * (-la + lb + lc) * (la - lb + lc) * (la + lb - lc), 0)
    )
    return angles.min(), angles.max(), area.sum(), min(la.min(), lb.min(), lc.min())


def cotan_spectrum(verts, faces, area_target):
    """Independent dense cotangent spectrum at the rescaled area."""
    v = verts * np.sqrt(area_target / triangle_stats(verts, faces)[2])
    n = len(v)
    L = np.zeros((n, n))
    mass = np.zeros(n)
    for (i, j, k) in faces:
        for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
            e1, e2 = v[b] - v[a], v[c] - v[a]
            cot = e1 @ e2 / np.linalg.norm(np.cross(e1, e2))
            L[b, c] -= 0.5 * cot
            L[c, b] -= 0.5 * cot
            L[b, b] += 0.5 * cot
            L[c, c] += 0.5 * cot
        e1, e2 = v[j] - v[i], v[k] - v[i]
        fa = 0.5 * np.linalg.norm(np.cross(e1, e2))
        for p in (i, j, k):
            mass[p] += fa / 3.0
    from scipy.linalg import eigh

    vals = eigh(L, np.diag(mass), eigvals_only=True)
    return vals[1], vals[-1]


def main():
    def report(stage, v, f):
        mn, mx, ar, me = triangle_stats(v, np.asarray(f))
        print(f"[{stage}] V={len(v)} area={ar:.4f} min_angle={np.degrees(mn):.2f} "
              f"max_angle={np.degrees(mx):.2f} min_edge={me:.4g}")

    verts, faces = extract()
    verts = project(verts)
    validate(verts, faces)
    report("extract", verts, faces)
    verts, faces = decimate(verts, faces, TARGET_V)
    report("decimate", verts, faces)
    verts, faces = improve(verts, faces)
    report("improve", verts, faces)
    v_count, e_count, f_count, chi, volume = validate(verts, faces)
    if volume < 0:
        faces = faces[:, ::-1].copy()
        v_count, e_count, f_count, chi, volume = validate(verts, faces)
    if not (300 <= v_count <= 500):
        raise SystemExit(f"V = {v_count} outside [300, 500]: retune the target")
    min_ang, max_ang, area, min_edge = triangle_stats(verts, faces)
    lam1, lam_max = cotan_spectrum(verts, faces, 4.0 * np.pi)

    with open(OUT_PATH, "w") as out:
        out.write("OFF\n")
        out.write(f"{v_count} {f_count} {e_count}\n")
        for p in verts:
            out.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for (a, b, c) in faces:
            out.write(f"3 {a} {b} {c}\n")

    print(f"wrote {OUT_PATH}")
    print(f"V={v_count} E={e_count} F={f_count} chi={chi}")
    print(f"signed volume={volume:.6f} (outward orientation)")
    print(f"area={area:.12g} min_edge={min_edge:.4g}")
    print(f"min angle={np.degrees(min_ang):.2f} deg  max angle={np.degrees(max_ang):.2f} deg")
    print(f"at area 4*pi: lambda1={lam1:.12g} lambda_max={lam_max:.6g}")


if __name__ == "__main__":
    sys.exit(main())
