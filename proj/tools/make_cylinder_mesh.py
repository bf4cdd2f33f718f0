"""Regenerate data/meshes/cylinder.{node,ele,edge} with the Triangle library.

Channel [0, 2.2] x [0, 0.41] minus a disc of radius 0.05 centred at
(0.2, 0.2). Boundary markers: 1 bottom, 2 outflow, 3 top, 4 inflow,
5 cylinder. Usage: python3 tools/make_cylinder_mesh.py [out_stem]
"""
import math
import sys

import numpy as np
import triangle

L, H = 2.2, 0.41
XC, YC, R = 0.2, 0.2, 0.05
N_CIRCLE = 48
MAX_AREA = 6e-4


def polyline(a, b, n):
    return [(a[0] + (b[0] - a[0]) * k / n, a[1] + (b[1] - a[1]) * k / n) for k in range(n)]


def build():
    corners = [(0.0, 0.0), (L, 0.0), (L, H), (0.0, H)]
    counts = [70, 14, 70, 14]
    markers = [1, 2, 3, 4]
    verts, segs, seg_markers = [], [], []
    for i in range(4):
        start = len(verts)
        verts += polyline(corners[i], corners[(i + 1) % 4], counts[i])
        for k in range(counts[i]):
            a = start + k
            b = (start + k + 1) % sum(counts)
            segs.append((a, b))
            seg_markers.append(markers[i])
    start = len(verts)
    for k in range(N_CIRCLE):
        th = 2 * math.pi * k / N_CIRCLE
        verts.append((XC + R * math.cos(th), YC + R * math.sin(th)))
        segs.append((start + k, start + (k + 1) % N_CIRCLE))
        seg_markers.append(5)
    geom = dict(
        vertices=np.array(verts),
        segments=np.array(segs),
        segment_markers=np.array(seg_markers).reshape(-1, 1),
        holes=np.array([(XC, YC)]),
    )
    # Y: no Steiner points on the boundary, so the circle stays a 48-gon
    return triangle.triangulate(geom, "pq30a%gYe" % MAX_AREA)


def write(mesh, stem):
    v = mesh["vertices"]
    t = mesh["triangles"]
    e = mesh["edges"]
    em = mesh["edge_markers"].ravel()
    with open(stem + ".node", "w") as f:
        f.write("# cylinder channel, generated by tools/make_cylinder_mesh.py\n")
        f.write("%d 2 0 0\n" % len(v))
        for i, (x, y) in enumerate(v):
            f.write("%d %.17g %.17g\n" % (i, x, y))
    with open(stem + ".ele", "w") as f:
        f.write("%d 3 0\n" % len(t))
        for i, tri in enumerate(t):
            f.write("%d %d %d %d\n" % (i, tri[0], tri[1], tri[2]))
    with open(stem + ".edge", "w") as f:
        f.write("%d 1\n" % len(e))
        for i, (a, b) in enumerate(e):
            f.write("%d %d %d %d\n" % (i, a, b, em[i]))
    print("%d vertices, %d triangles, %d edges" % (len(v), len(t), len(e)))


if __name__ == "__main__":
    write(build(), sys.argv[1] if len(sys.argv) > 1 else "data/meshes/cylinder")
