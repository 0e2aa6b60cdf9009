"""Tropical theta function and the hexagonal face complex of its graph.

Trop(xi) = min over n in Z^2 of s n.Qn/2 + n.xi. The cells where a single
n attains the minimum are translates of the hexagon around the origin,
cell(n) = cell(0) - sQn, and the complex is carried to itself by the lattice
action xi -> xi + sQm.

When s and the inputs are rational everything is computed with Fractions,
so vertex positions and heights are exact. Otherwise floats are used and
ties are detected at TIE_TOL.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import itertools
import math
import numbers

from .errors import DegeneracyError, DomainError

TIE_TOL = 1e-10
Q = ((2, 1), (1, 2))


def _exact(*vals):
    return all(isinstance(v, numbers.Rational) for v in vals)


def _num(v, exact):
    return Fraction(v) if exact else float(v)


@dataclass(frozen=True)
class TropParam:
    s: object

    @property
    def exact(self):
        return _exact(self.s)

    def functional(self, n, xi):
        """s n.Qn/2 + n.xi."""
        n1, n2 = n
        q = n1 * n1 + n1 * n2 + n2 * n2  # n.Qn/2
        return self.s * q + n1 * xi[0] + n2 * xi[1]

    def shift_vector(self, m):
        """sQm, the lattice action on the xi plane."""
        return (self.s * (2 * m[0] + m[1]), self.s * (m[0] + 2 * m[1]))


def make_trop_param(s):
    if not isinstance(s, numbers.Real) or isinstance(s, bool):
        raise DomainError(f"tropical scale must be a real number, got {s!r}")
    if not s > 0:
        raise DomainError(f"tropical scale s={s} must be positive")
    return TropParam(Fraction(s) if isinstance(s, numbers.Rational) else float(s))


@dataclass(frozen=True)
class TropValue:
    value: object
    argmin: tuple


def search_radius(p, xi):
    """Every minimizer satisfies |n|_inf <= this.

    n.Qn >= |n|^2 gives f_n(xi) >= s|n|^2/2 - |n||xi| > 0 = f_0 once
    |n| > 2|xi|/s, and |xi|_2 <= |xi|_1.
    """
    return math.ceil(2 * (abs(xi[0]) + abs(xi[1])) / p.s)


def _is_tie(a, b, exact):
    return a == b if exact else abs(a - b) <= TIE_TOL * max(1.0, abs(a), abs(b))


def trop_theta(p, xi):
    """Minimum and sorted argmin set of s n.Qn/2 + n.xi."""
    exact = p.exact and _exact(*xi)
    xi = (_num(xi[0], exact), _num(xi[1], exact))
    B = search_radius(p, xi)
    best, vals = None, []
    for n in itertools.product(range(-B, B + 1), repeat=2):
        v = p.functional(n, xi)
        vals.append((n, v))
        if best is None or v < best:
            best = v
    arg = tuple(sorted(n for n, v in vals if _is_tie(v, best, exact)))
    return TropValue(best, arg)


def lattice_shift(p, value, xi, m):
    """(xi + sQm, Trop there) from (xi, Trop(xi)); argmin moves by n -> n - m."""
    sq = p.shift_vector(m)
    q = m[0] * m[0] + m[0] * m[1] + m[1] * m[1]
    return (xi[0] + sq[0], xi[1] + sq[1]), value - (m[0] * xi[0] + m[1] * xi[1]) - p.s * q


def _solve2(a, b, r, exact):
    """Solve the 2x2 system [a; b] x = r, or None if singular."""
    det = a[0] * b[1] - a[1] * b[0]
    if det == 0:
        return None
    if not exact:
        det = float(det)
    return ((r[0] * b[1] - a[1] * r[1]) / det, (a[0] * r[1] - r[0] * b[0]) / det)


def _tie_point(p, n, m1, m2, exact):
    """xi with f_n = f_m1 = f_m2, if the three functionals meet in a point."""
    d1 = (m1[0] - n[0], m1[1] - n[1])
    d2 = (m2[0] - n[0], m2[1] - n[1])
    zero = (_num(0, exact), _num(0, exact))
    r1 = p.functional(n, zero) - p.functional(m1, zero)
    r2 = p.functional(n, zero) - p.functional(m2, zero)
    return _solve2(d1, d2, (r1, r2), exact)


@lru_cache(maxsize=32)
def _cell0(p):
    """Vertices of the cell of 0 and the lattice vectors of its neighbours.

    The cell lies in |xi_i| <= s (compare with n = +-e_i), so every tie at a
    vertex involves |m|_inf <= 4 and a brute-force triple search is complete.
    """
    exact = p.exact
    cand = [m for m in itertools.product(range(-4, 5), repeat=2) if m != (0, 0)]
    verts = {}
    for m1, m2 in itertools.combinations(cand, 2):
        xi = _tie_point(p, (0, 0), m1, m2, exact)
        if xi is None or abs(xi[0]) > p.s or abs(xi[1]) > p.s:
            continue
        tv = trop_theta(p, xi)
        if (0, 0) in tv.argmin and m1 in tv.argmin and m2 in tv.argmin:
            verts[tv.argmin] = xi
    for arg in verts:
        if len(arg) > 3:
            raise DegeneracyError(f"{len(arg)}-fold tie at a vertex of the central cell")
    nbrs = sorted({m for arg in verts for m in arg if m != (0, 0)})
    return tuple(verts.items()), tuple(nbrs)


@dataclass(frozen=True)
class Vertex:
    xi: tuple
    eta: object
    active: tuple  # the three minimizing lattice vectors


@dataclass(frozen=True)
class Edge:
    ends: tuple  # vertex indices
    active: tuple  # the two lattice vectors that tie along it


@dataclass(frozen=True)
class Face:
    active: tuple  # the single minimizing lattice vector
    cycle: tuple  # vertex indices counterclockwise, empty if not closed in the window
    interior: bool


@dataclass
class FaceComplex:
    vertices: list
    edges: list
    faces: list
    window: tuple
    boundary: dict = field(default_factory=dict)
    identifications: list = field(default_factory=list)

    def degree(self, v):
        return sum(1 for e in self.edges if v in e.ends)

    def interior_vertices(self):
        """Vertices all of whose incident curve edges end inside the window."""
        return [i for i, v in enumerate(self.vertices) if self.degree(i) == len(v.active)]

    def interior_faces(self):
        return [f for f in self.faces if f.interior]

    def euler_characteristic(self):
        """V - E + F of the window subdivided by the curve; 1 for a box."""
        b = self.boundary
        V = len(self.vertices) + b.get("crossings", 0) + b.get("corners", 0)
        E = len(self.edges) + b.get("stubs", 0) + b.get("chords", 0) + b.get("sides", 0)
        return V - E + len(self.faces)


def _window(window, exact):
    (x0, x1), (y0, y1) = window
    if not (x0 <= x1 and y0 <= y1):
        raise DomainError(f"empty window {window!r}")
    return (_num(x0, exact), _num(x1, exact)), (_num(y0, exact), _num(y1, exact))


def _inside(xi, win):
    (x0, x1), (y0, y1) = win
    return x0 <= xi[0] <= x1 and y0 <= xi[1] <= y1


def _cells_near(p, win):
    """Lattice vectors whose cell can meet the window.

    cell(n) = cell(0) - sQn lies in the box -sQn + [-s, s]^2.
    """
    (x0, x1), (y0, y1) = win
    B = max(search_radius(p, (x, y)) for x in (x0, x1) for y in (y0, y1))
    out = []
    for n in itertools.product(range(-B, B + 1), repeat=2):
        c = p.shift_vector(n)
        if x0 - p.s <= -c[0] <= x1 + p.s and y0 - p.s <= -c[1] <= y1 + p.s:
            out.append(n)
    return out


def _walk_side(p, a, b, exact):
    """Points where the minimizer changes along the segment a -> b, with
    the argmin there, in order; and the cells met along the way."""
    out, cells = [], []
    u, one = _num(0, exact), _num(1, exact)
    step = (b[0] - a[0], b[1] - a[1])
    B = max(search_radius(p, a), search_radius(p, b))
    lattice = list(itertools.product(range(-B, B + 1), repeat=2))
    while True:
        pt = (a[0] + u * step[0], a[1] + u * step[1])
        arg = trop_theta(p, pt).argmin
        if len(arg) > 1 and u > 0:
            out.append((pt, arg))
        if u == one:
            return out, cells
        here = _cell_after(p, pt, step, arg)
        cells.append(here)
        nxt = None
        for m in lattice:
            if m == here:
                continue
            # f_m - f_here is affine along the segment
            g0 = p.functional(m, pt) - p.functional(here, pt)
            slope = (m[0] - here[0]) * step[0] + (m[1] - here[1]) * step[1]
            if slope < 0 and (g0 > 0 if exact else g0 > TIE_TOL):
                v = u + g0 / -slope
                if v <= one and (nxt is None or v < nxt):
                    nxt = v
        if nxt is None:
            return out, cells
        u = nxt


def _cell_after(p, pt, step, arg):
    """Which of the tied minimizers at pt continues in direction step."""
    if len(arg) == 1:
        return arg[0]
    # the minimizer just past pt has the least directional derivative n.step
    best = min(m[0] * step[0] + m[1] * step[1] for m in arg)
    winners = [m for m in arg if m[0] * step[0] + m[1] * step[1] == best]
    if len(winners) > 1:
        raise DegeneracyError(f"window side runs along the curve at {pt}")
    return winners[0]


def face_complex(p, window):
    """Vertices, edges and faces of the tropical curve inside a closed box
    window ((x0, x1), (y0, y1)), in canonical order."""
    exact = p.exact and _exact(*window[0], *window[1])
    win = _window(window, exact)
    verts0, nbrs = _cell0(p)
    found = {}
    for n in _cells_near(p, win):
        c = p.shift_vector(n)
        for arg, xi in verts0:
            if arg[0] != (0, 0) and (0, 0) not in arg:
                continue
            pt = (xi[0] - c[0], xi[1] - c[1])
            if not _inside(pt, win):
                continue
            tv = trop_theta(p, pt)
            if len(tv.argmin) > 3:
                raise DegeneracyError(f"{len(tv.argmin)}-fold tie at {pt}")
            if len(tv.argmin) < 3:
                raise DegeneracyError(f"translated vertex {pt} is not a triple point")
            found[tv.argmin] = Vertex(pt, tv.value, tv.argmin)
    vertices = sorted(found.values(), key=lambda v: (v.xi[1], v.xi[0]))
    index = {v.active: i for i, v in enumerate(vertices)}

    edges = []
    pair_ends = {}
    for i, v in enumerate(vertices):
        for a, b in itertools.combinations(v.active, 2):
            pair_ends.setdefault((a, b), []).append(i)
    for pair, ends in sorted(pair_ends.items()):
        if len(ends) == 2:
            edges.append(Edge(tuple(ends), pair))
        elif len(ends) > 2:
            raise DegeneracyError(f"edge {pair} has {len(ends)} vertex endpoints")

    (x0, x1), (y0, y1) = win
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    crossings, cells = {}, set()
    for a, b in zip(corners, corners[1:] + corners[:1]):
        if a == b:
            continue
        events, met = _walk_side(p, a, b, exact)
        cells.update(met)
        for pt, arg in events:
            if len(arg) == 2:
                crossings[pt] = arg
    if len(set(corners)) == 1:
        cells.update(trop_theta(p, corners[0]).argmin[:1])
    # crossings through a vertex are that vertex, not a separate point
    crossings = {pt: arg for pt, arg in crossings.items() if arg not in index}
    stubs = chords = grazes = 0
    by_pair = {}
    for arg in crossings.values():
        by_pair[arg] = by_pair.get(arg, 0) + 1
    for pair, k in by_pair.items():
        if pair in pair_ends:
            stubs += k
        elif k == 2:
            chords += 1
        else:
            # the curve touches the window at a corner and leaves again
            grazes += k
    for v in vertices:
        cells.update(v.active)
    faces = []
    for n in sorted(cells):
        cyc = [i for i, v in enumerate(vertices) if n in v.active]
        closed = len(cyc) == len([1 for arg, _ in verts0]) and not any(
            n in arg for arg in crossings.values())
        if closed:
            cx = sum(vertices[i].xi[0] for i in cyc) / len(cyc)
            cy = sum(vertices[i].xi[1] for i in cyc) / len(cyc)
            cyc.sort(key=lambda i: math.atan2(float(vertices[i].xi[1] - cy),
                                              float(vertices[i].xi[0] - cx)))
        faces.append(Face(n, tuple(cyc) if closed else (), closed))

    # corners that the curve passes through are already boundary points
    free_corners = len({pt for pt in corners if pt not in crossings})
    points = free_corners + len(crossings)
    boundary = {
        "corners": free_corners,
        "crossings": len(crossings),
        "stubs": stubs,
        "chords": chords,
        "grazes": grazes,
        "sides": points if len(set(corners)) == 4 else 0,
        "neighbours": list(nbrs),
    }
    return FaceComplex(vertices, edges, faces, window, boundary)


def _orbits(items, related):
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(items)), 2):
        if related(items[i], items[j]):
            parent[find(i)] = find(j)
    groups = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def _lattice_difference(p, a, b):
    """m with b = a + sQm, or None."""
    d0, d1 = b[0] - a[0], b[1] - a[1]
    # Q^{-1} = [[2, -1], [-1, 2]] / 3
    m0 = (2 * d0 - d1) / (3 * p.s)
    m1 = (2 * d1 - d0) / (3 * p.s)
    r0, r1 = round(m0), round(m1)
    ok = (m0 == r0 and m1 == r1) if p.exact else (
        abs(m0 - r0) < 1e-9 and abs(m1 - r1) < 1e-9)
    return (int(r0), int(r1)) if ok else None


def fundamental_domain(p, eps, representative=(0, 0)):
    """The closure of one cell with its boundary identifications under the
    lattice action, cut at height eps.

    Heights are measured in the chart of the representative cell, where the
    graph is flat at 0 over the cell; so every vertex and edge has height 0
    and a negative eps keeps the face only.
    """
    verts0, _ = _cell0(p)
    c = p.shift_vector(representative)
    n = tuple(representative)
    vertices = []
    for arg, xi in sorted(verts0, key=lambda t: t[1]):
        pt = (xi[0] - c[0], xi[1] - c[1])
        act = tuple(sorted((a[0] + n[0], a[1] + n[1]) for a in arg))
        vertices.append(Vertex(pt, 0 * p.s, act))
    cx = sum(v.xi[0] for v in vertices) / len(vertices)
    cy = sum(v.xi[1] for v in vertices) / len(vertices)
    order = sorted(range(len(vertices)), key=lambda i: math.atan2(
        float(vertices[i].xi[1] - cy), float(vertices[i].xi[0] - cx)))
    vertices = [vertices[i] for i in order]
    k = len(vertices)
    edges = [Edge((i, (i + 1) % k), tuple(sorted(set(vertices[i].active) & set(vertices[(i + 1) % k].active))))
             for i in range(k)]
    face = Face(n, tuple(range(k)), True)

    ident = []
    for i, j in itertools.combinations(range(k), 2):
        m = _lattice_difference(p, vertices[i].xi, vertices[j].xi)
        if m is not None:
            ident.append({"kind": "vertex", "cells": [i, j], "shift": list(m)})
    mids = [tuple((vertices[a].xi[t] + vertices[b].xi[t]) / 2 for t in (0, 1)) for a, b in (e.ends for e in edges)]
    for i, j in itertools.combinations(range(k), 2):
        m = _lattice_difference(p, mids[i], mids[j])
        if m is not None:
            ident.append({"kind": "edge", "cells": [i, j], "shift": list(m)})

    vorb = _orbits(vertices, lambda a, b: _lattice_difference(p, a.xi, b.xi) is not None)
    eorb = _orbits(mids, lambda a, b: _lattice_difference(p, a, b) is not None)
    if eps < 0:
        vertices, edges, ident, vorb, eorb = [], [], [], [], []
        face = Face(n, (), True)
    fc = FaceComplex(vertices, edges, [face], None, {
        "eps": eps, "vertex_orbits": len(vorb), "edge_orbits": len(eorb), "face_orbits": 1})
    fc.identifications = ident
    return fc


def _coord(v):
    if isinstance(v, Fraction):
        return {"value": float(v), "exact": str(v)}
    return {"value": float(v)}


def to_record(fc):
    """Plain dict form, in the complex's canonical order."""
    return {
        "window": None if fc.window is None else [[float(a) for a in side] for side in fc.window],
        "vertices": [{"xi": [_coord(v.xi[0]), _coord(v.xi[1])], "eta": _coord(v.eta),
                      "active": [list(a) for a in v.active]} for v in fc.vertices],
        "edges": [{"ends": list(e.ends), "active": [list(a) for a in e.active]} for e in fc.edges],
        "faces": [{"active": list(f.active), "cycle": list(f.cycle), "interior": f.interior}
                  for f in fc.faces],
        "boundary": fc.boundary,
        "identifications": fc.identifications,
    }


def to_csv_rows(fc):
    """Flat vertex and edge rows: kind, index, xi1, xi2, eta, a, b."""
    rows = [("kind", "index", "xi1", "xi2", "eta", "a", "b")]
    for i, v in enumerate(fc.vertices):
        rows.append(("vertex", i, float(v.xi[0]), float(v.xi[1]), float(v.eta),
                     "", ""))
    for i, e in enumerate(fc.edges):
        rows.append(("edge", i, "", "", "", e.ends[0], e.ends[1]))
    return rows
