"""Plain-text exchange formats: OFF meshes, CSV tables, JSON reports."""
from __future__ import annotations

import csv
import json

import numpy as np

from .mesh import SurfaceMesh, element_angles


def write_off(path, mesh):
    v, t = mesh.vertices, mesh.triangles
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(v)} {len(t)} {mesh.n_edges}\n")
        for x, y, z in v.tolist():
            fh.write(f"{x!r} {y!r} {z!r}\n")
        for a, b, c in t.tolist():
            fh.write(f"3 {a} {b} {c}\n")


def read_off(path):
    """Return ``(vertices, triangles)`` from an ASCII OFF file of triangles."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "OFF":
        raise ValueError(f"{path}: OFF header missing")
    nv, nf = (int(s) for s in lines[1].split()[:2])
    vertices = np.array([[float(s) for s in ln.split()[:3]] for ln in lines[2 : 2 + nv]]).reshape(nv, 3)
    faces = []
    for ln in lines[2 + nv : 2 + nv + nf]:
        items = [int(s) for s in ln.split()]
        if items[0] != 3:
            raise ValueError(f"{path}: only triangular faces are supported")
        faces.append(items[1:4])
    return vertices, np.array(faces, dtype=np.int64).reshape(nf, 3)


def mesh_from_off(path, surface=None):
    vertices, triangles = read_off(path)
    return SurfaceMesh.from_arrays(vertices, triangles, surface)


def write_angles_csv(path, mesh):
    angles = element_angles(mesh.vertices, mesh.triangles)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["element", "angle0", "angle1", "angle2"])
        for e, (a, b, c) in enumerate(angles):
            w.writerow([e, repr(float(a)), repr(float(b)), repr(float(c))])


def write_solution_csv(path, mesh, u):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "x", "y", "z", "u", "is_boundary"])
        for i, ((x, y, z), val) in enumerate(zip(mesh.vertices, u)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(z)), repr(float(val)), int(i >= mesh.n_interior)])


def read_solution_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["u"]) for r in rows])


def write_table_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
