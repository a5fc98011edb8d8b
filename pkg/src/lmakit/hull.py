"""3D convex hull (quickhull) and hull volume.

Degenerate inputs (fewer than 4 points, collinear or coplanar sets) have a
well-defined volume of 0 rather than raising.
"""

import numpy as np

from .errors import LmaError

_DEGENERATE_EPS = 1e-12


class _Face:
    __slots__ = ("tri", "normal", "offset", "outside", "alive")

    def __init__(self, tri, normal, offset):
        self.tri = tri
        self.normal = normal
        self.offset = offset
        self.outside = []  # point indices strictly above this face
        self.alive = True


def _oriented_face(pts, tri, interior):
    a, b, c = pts[tri[0]], pts[tri[1]], pts[tri[2]]
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n)
    if nn == 0.0:
        return None
    n = n / nn
    off = float(n @ a)
    if float(n @ interior) - off > 0.0:
        n, off = -n, -off
        tri = (tri[0], tri[2], tri[1])
    return _Face(tri, n, off)


def _initial_simplex(pts, tol):
    n = len(pts)
    # two extreme points: farthest pair among the six axis extremes
    ext = set()
    for ax in range(3):
        ext.add(int(np.argmin(pts[:, ax])))
        ext.add(int(np.argmax(pts[:, ax])))
    ext = sorted(ext)
    best, pair = -1.0, None
    for i in ext:
        for j in ext:
            d = float(np.linalg.norm(pts[i] - pts[j]))
            if d > best:
                best, pair = d, (i, j)
    if best <= tol:
        return None
    i0, i1 = pair
    # farthest from the line i0-i1
    u = pts[i1] - pts[i0]
    u = u / np.linalg.norm(u)
    rel = pts - pts[i0]
    perp = rel - np.outer(rel @ u, u)
    d_line = np.linalg.norm(perp, axis=1)
    i2 = int(np.argmax(d_line))
    if d_line[i2] <= tol:
        return None
    # farthest from the plane i0-i1-i2
    nrm = np.cross(pts[i1] - pts[i0], pts[i2] - pts[i0])
    nrm = nrm / np.linalg.norm(nrm)
    d_plane = (pts - pts[i0]) @ nrm
    i3 = int(np.argmax(np.abs(d_plane)))
    if abs(d_plane[i3]) <= tol:
        return None
    return i0, i1, i2, i3


def convex_hull_facets(points):
    """Outward-oriented triangular facets (index triples) of the hull.

    Returns None when the point set is degenerate (volume 0).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise LmaError(f"expected N x 3 points, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise LmaError("hull input contains non-finite coordinates")
    if len(pts) < 4:
        return None
    scale = float(np.max(np.ptp(pts, axis=0)))
    tol = _DEGENERATE_EPS * max(1.0, scale)
    simplex = _initial_simplex(pts, tol)
    if simplex is None:
        return None
    interior = pts[list(simplex)].mean(axis=0)

    faces = []
    for skip in range(4):
        tri = tuple(simplex[k] for k in range(4) if k != skip)
        face = _oriented_face(pts, tri, interior)
        faces.append(face)

    vis_tol = max(tol, 1e-10 * max(1.0, scale))

    def assign(face, idx):
        if len(idx) == 0:
            return
        d = pts[idx] @ face.normal - face.offset
        above = d > vis_tol
        if above.any():
            order = np.argsort(-d[above], kind="stable")
            face.outside = [int(i) for i in np.asarray(idx)[above][order]]
        else:
            face.outside = []

    all_idx = np.array([i for i in range(len(pts)) if i not in simplex], dtype=int)
    claimed = set()
    for face in faces:
        free = np.array([i for i in all_idx if i not in claimed], dtype=int)
        assign(face, free)
        claimed.update(face.outside)

    stack = [f for f in faces if f.outside]
    while stack:
        face = stack.pop()
        if not face.alive or not face.outside:
            continue
        apex = face.outside[0]
        p = pts[apex]
        # find all faces visible from the apex
        visible = []
        seen = set()
        queue = [face]
        seen.add(id(face))
        while queue:
            f = queue.pop()
            if not f.alive:
                continue
            if float(f.normal @ p) - f.offset > vis_tol:
                visible.append(f)
                for g in faces:
                    if g.alive and id(g) not in seen and _shares_edge(f, g):
                        seen.add(id(g))
                        queue.append(g)
        # horizon: edges of visible faces bordering a non-visible face
        vis_ids = {id(f) for f in visible}
        edge_count = {}
        edge_dir = {}
        for f in visible:
            t = f.tri
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (a, b) if a < b else (b, a)
                edge_count[key] = edge_count.get(key, 0) + 1
                edge_dir[key] = (a, b)
        horizon = [edge_dir[k] for k, c in edge_count.items() if c == 1]

        orphan = []
        for f in visible:
            f.alive = False
            orphan.extend(i for i in f.outside if i != apex)
        orphan = np.array(sorted(set(orphan)), dtype=int)

        new_faces = []
        for a, b in horizon:
            nf = _oriented_face(pts, (a, b, apex), interior)
            if nf is not None:
                new_faces.append(nf)
        remaining = orphan
        for nf in new_faces:
            assign(nf, remaining)
            if nf.outside:
                taken = set(nf.outside)
                remaining = np.array([i for i in remaining if i not in taken], dtype=int)
        faces = [f for f in faces if f.alive] + new_faces
        stack.extend(f for f in new_faces if f.outside)

    return [f.tri for f in faces if f.alive]


def _shares_edge(f, g):
    return len(set(f.tri) & set(g.tri)) == 2


def hull_volume(points):
    """Volume of the convex hull, by signed tetrahedra from the centroid."""
    pts = np.asarray(points, dtype=float)
    facets = convex_hull_facets(pts)
    if facets is None:
        return 0.0
    verts = sorted({i for tri in facets for i in tri})
    c = pts[verts].mean(axis=0)
    vol = 0.0
    for a, b, d in facets:
        vol += float(np.dot(pts[a] - c, np.cross(pts[b] - c, pts[d] - c)))
    return abs(vol) / 6.0
