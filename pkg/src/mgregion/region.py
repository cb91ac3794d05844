"""Polygons in the (S^U, S^e) plane.

Regions are down-sets, so the axes S^U >= 0 and S^e >= 0 are always
added.  Half-plane intersection is done by clipping a large box; the convex
hull and area use shapely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, MultiPoint, Point, Polygon
from shapely.geometry.polygon import orient

from .analytic import LinearConstraint

_BOX = 8.0
_EPS = 1e-12


class RegionError(ValueError):
    pass


class UnboundedRegionError(RegionError):
    pass


class EmptyRegionError(RegionError):
    pass


AXES = (LinearConstraint(-1.0, 0.0, 0.0, "S^U >= 0"), LinearConstraint(0.0, -1.0, 0.0, "S^e >= 0"))


@dataclass(frozen=True)
class MGRegion:
    constraints: tuple[LinearConstraint, ...]
    vertices: np.ndarray  # counter-clockwise, no repeated closing vertex
    kind: str = "polygon"  # or "segment" / "point"

    @property
    def polygon(self):
        """Shapely geometry: a Polygon, or a LineString/Point for degenerate regions."""
        if self.kind == "segment":
            return LineString(self.vertices)
        if self.kind == "point":
            return Point(self.vertices[0])
        return Polygon(self.vertices)

    @property
    def area(self) -> float:
        return float(self.polygon.area) if self.kind == "polygon" else 0.0

    def contains_point(self, su: float, se: float, tol: float = 1e-9) -> bool:
        return all(c.slack(su, se) >= -tol for c in self.constraints)

    def to_rows(self) -> list[tuple[int, float, float]]:
        return [(i, float(x), float(y)) for i, (x, y) in enumerate(self.vertices)]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "constraints": [c.to_json() for c in self.constraints],
        }


def _clip(poly: list[tuple[float, float]], c: LinearConstraint) -> list[tuple[float, float]]:
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = c.coeff_u * p[0] + c.coeff_e * p[1] - c.rhs
        fq = c.coeff_u * q[0] + c.coeff_e * q[1] - c.rhs
        if fp <= _EPS:
            out.append(p)
        if (fp < -_EPS and fq > _EPS) or (fp > _EPS and fq < -_EPS):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _simplify(pts: list[tuple[float, float]], tol: float = 1e-12) -> np.ndarray:
    """Drop repeated and collinear vertices of a convex ring."""
    arr = []
    for p in pts:
        if not arr or np.hypot(p[0] - arr[-1][0], p[1] - arr[-1][1]) > tol:
            arr.append(p)
    if len(arr) > 1 and np.hypot(arr[0][0] - arr[-1][0], arr[0][1] - arr[-1][1]) <= tol:
        arr.pop()
    changed = True
    while changed and len(arr) > 2:
        changed = False
        for i in range(len(arr)):
            a, b, c = np.array(arr[i - 1]), np.array(arr[i]), np.array(arr[(i + 1) % len(arr)])
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if abs(cross) <= tol:
                arr.pop(i)
                changed = True
                break
    return np.array(arr, dtype=float).reshape(-1, 2)


def _ccw_from(verts: np.ndarray) -> np.ndarray:
    if len(verts) < 3:
        return verts
    ring = orient(Polygon(verts), sign=1.0).exterior.coords[:-1]
    arr = np.array(ring, dtype=float)
    # start from the vertex nearest the origin for stable output
    start = int(np.argmin(arr[:, 0] ** 2 + arr[:, 1] ** 2))
    return np.roll(arr, -start, axis=0)


def polygon_from_constraints(constraints) -> MGRegion:
    """Intersect the half-planes (plus the two axes) into a convex polygon."""
    cons = tuple(constraints) + AXES
    for c in cons:
        if c.coeff_u == 0 and c.coeff_e == 0 and c.rhs < 0:
            raise EmptyRegionError(f"constraint {c.label or c} cannot hold")
    poly = [(0.0, 0.0), (_BOX, 0.0), (_BOX, _BOX), (0.0, _BOX)]
    for c in cons:
        poly = _clip(poly, c)
        if not poly:
            raise EmptyRegionError("the constraints have no common point")
    verts = _simplify(poly)
    if len(verts) == 0:
        raise EmptyRegionError("the constraints have no common point")
    if np.any(verts >= _BOX - 1e-9):
        raise UnboundedRegionError("the constraints do not bound the region")
    kind = {1: "point", 2: "segment"}.get(len(verts), "polygon")
    return MGRegion(cons, _ccw_from(verts), kind)


def _edge_constraints(verts: np.ndarray) -> tuple[LinearConstraint, ...]:
    out = []
    n = len(verts)
    for i in range(n):
        (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % n]
        # interior is to the left of a ccw edge
        a, b = (y2 - y1), -(x2 - x1)
        out.append(LinearConstraint(float(a), float(b), float(a * x1 + b * y1), "hull edge"))
    return tuple(out)


def timeshare_hull(points) -> MGRegion:
    """Down-set closure and convex hull of achievable MG pairs."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if np.any(pts < 0) or np.any(pts > 1):
        raise RegionError("MG pairs must lie in [0, 1]^2")
    cloud = [(0.0, 0.0)]
    for x, y in pts:
        cloud += [(x, y), (x, 0.0), (0.0, y)]
    hull = MultiPoint(cloud).convex_hull
    if hull.geom_type != "Polygon":
        coords = np.array(hull.coords if hull.geom_type == "LineString" else [hull.coords[0]])
        kind = "segment" if len(coords) == 2 else "point"
        return MGRegion(AXES, coords, kind)
    verts = _simplify(list(orient(hull, 1.0).exterior.coords[:-1]))
    verts = _ccw_from(verts)
    return MGRegion(_edge_constraints(verts), verts, "polygon")


def boundary_samples(region: MGRegion, samples: int) -> np.ndarray:
    v = region.vertices
    n = len(v)
    per = max(1, samples // max(n, 1))
    t = np.linspace(0.0, 1.0, per, endpoint=False)[:, None]
    return np.concatenate([v[i] + t * (v[(i + 1) % n] - v[i]) for i in range(n)])


def max_violation(points: np.ndarray, constraints) -> float:
    worst = -np.inf
    for c in constraints:
        worst = max(worst, float(np.max(c.coeff_u * points[:, 0] + c.coeff_e * points[:, 1] - c.rhs)))
    return worst


def is_subset(inner: MGRegion, outer: MGRegion, samples: int = 200, tol: float = 1e-9) -> tuple[bool, float]:
    """Check every inner vertex and sampled boundary point against the outer constraints."""
    if samples < 100:
        raise RegionError("use at least 100 boundary samples")
    pts = np.concatenate([inner.vertices, boundary_samples(inner, samples)])
    v = max(0.0, max_violation(pts, outer.constraints))
    return v <= tol, v


def vertices_match(a: MGRegion, b: MGRegion, tol: float = 1e-6) -> tuple[bool, float]:
    """Whether the two vertex sets coincide up to ``tol`` (largest mismatch returned)."""
    va, vb = a.vertices, b.vertices
    if len(va) != len(vb):
        d = float(a.polygon.hausdorff_distance(b.polygon))
        return False, max(d, tol * 10)
    dist = np.sqrt(((va[:, None, :] - vb[None, :, :]) ** 2).sum(-1))
    worst = max(float(dist.min(axis=1).max()), float(dist.min(axis=0).max()))
    return worst <= tol, worst


def render_svg(curves: dict[str, MGRegion], size: int = 480, margin: int = 40) -> str:
    """Plain SVG with axes and one labelled outline per region."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    xs = [float(r.vertices[:, 0].max()) for r in curves.values()] or [1.0]
    ys = [float(r.vertices[:, 1].max()) for r in curves.values()] or [1.0]
    sx = (size - 2 * margin) / max(max(xs), 1e-9)
    sy = (size - 2 * margin) / max(max(ys), 1e-9)

    def pt(x, y):
        return f"{margin + x * sx:.3f},{size - margin - y * sy:.3f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<line x1="{margin}" y1="{size - margin}" x2="{size - margin}" y2="{size - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{size - margin}" x2="{margin}" y2="{margin}" stroke="black"/>',
        f'<text x="{size - margin}" y="{size - margin + 25}" text-anchor="end">S^U</text>',
        f'<text x="{margin - 30}" y="{margin - 10}">S^e</text>',
    ]
    for i, (name, reg) in enumerate(curves.items()):
        col = colors[i % len(colors)]
        path = " ".join(pt(x, y) for x, y in reg.vertices)
        parts.append(f'<polygon points="{path}" fill="none" stroke="{col}" stroke-width="2"/>')
        parts.append(f'<text x="{size - margin}" y="{margin + 16 * i}" fill="{col}" text-anchor="end">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
