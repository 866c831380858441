#!/usr/bin/env python3
"""Regenerates the bundled shape files in data/shapes/.

Every shape is a single CCW outer ring with boundary vertices spaced densely
enough for the matcher's boundary-resolution needs (displacements are
piecewise linear between boundary vertices, so sparse rings cannot fit
curved or cornered targets).
"""

import json
import math
import pathlib

from shapely.geometry import Polygon as ShapelyPolygon

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "shapes"


def densify(corners, spacing):
    """Closed polyline through corners, each edge split into ~spacing chunks."""
    pts = []
    n = len(corners)
    for i in range(n):
        ax, ay = corners[i]
        bx, by = corners[(i + 1) % n]
        length = math.hypot(bx - ax, by - ay)
        steps = max(1, round(length / spacing))
        for j in range(steps):
            t = j / steps
            pts.append((ax + t * (bx - ax), ay + t * (by - ay)))
    return pts


def ellipse(a, b, k):
    return [(a * math.cos(2 * math.pi * i / k), b * math.sin(2 * math.pi * i / k))
            for i in range(k)]


def star(tips, r_out, r_in, phase):
    corners = []
    for i in range(tips):
        t_out = phase + 2 * math.pi * i / tips
        t_in = t_out + math.pi / tips
        corners.append((r_out * math.cos(t_out), r_out * math.sin(t_out)))
        corners.append((r_in * math.cos(t_in), r_in * math.sin(t_in)))
    return corners


def bend(points, rate):
    """Rotates each point about the origin by rate * y, a smooth articulation."""
    out = []
    for x, y in points:
        t = rate * y
        c, s = math.cos(t), math.sin(t)
        out.append((c * x - s * y, s * x + c * y))
    return out


def translate(points, dx, dy):
    return [(x + dx, y + dy) for x, y in points]


def diameter(points):
    return max(math.hypot(ax - bx, ay - by) for ax, ay in points for bx, by in points)


def save(name, points):
    poly = ShapelyPolygon(points)
    if not poly.is_valid:
        raise SystemExit(f"{name}: generated ring is not simple")
    if poly.exterior.is_ccw is False:
        points = points[::-1]
    doc = {"rings": [{"role": "outer",
                      "points": [[round(x, 12), round(y, 12)] for x, y in points]}]}
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"{name}: {len(points)} vertices, area {poly.area:.4f}")


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    save("ellipse", ellipse(0.55, 0.32, 64))
    save("rectangle", densify([(-0.50, -0.29), (0.50, -0.29), (0.50, 0.29), (-0.50, 0.29)],
                              spacing=0.045))

    star_pts = densify(star(5, 0.50, 0.28, math.pi / 2), spacing=0.045)
    save("star", star_pts)

    d = diameter(star_pts)
    shift = 0.10 * d
    angle = math.radians(25)
    save("star_translated", translate(star_pts, shift * math.cos(angle), shift * math.sin(angle)))

    save("star_bent", bend(star_pts, rate=0.6))


if __name__ == "__main__":
    main()
