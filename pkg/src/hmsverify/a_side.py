"""Morphism spaces and products between the Lagrangians L_j (U-shaped) and
K_j (rays) of the Landau-Ginzburg model.

Every Floer generator is a base intersection point carrying the fiber
intersection points of the two slopes that sit over it. The degree is the
sum of the base and fiber degrees, then shifted by the object shifts.
"""

from dataclasses import dataclass, field
from enum import Enum
import math
import re

import numpy as np

from . import lg_base
from ._linalg import lex_cokernel_basis, svd_rank
from .errors import RangeError, ShapeError
from .fiber_floer import calibrate, fiber_degree, fiber_intersections, fiber_triangle_constants
from .lattice_theta import DEFAULT_R, DEFAULT_TOL, StructureTensor, make_modular_param, mult_by_theta_matrix


class Family(Enum):
    F1 = "L"
    F2 = "K"


@dataclass(frozen=True)
class AObject:
    family: Family
    index: int
    shift: int = 0

    def __str__(self):
        s = f"{self.family.value}{self.index}"
        return s + (f"[{self.shift}]" if self.shift else "")


def L(j, shift=0):
    return AObject(Family.F1, j, shift)


def K(j, shift=0):
    return AObject(Family.F2, j, shift)


_OBJ = re.compile(r"^\s*([LK])\s*(-?\d+)\s*(?:\[\s*(-?\d+)\s*\])?\s*$")


def parse_object(text):
    """'L0', 'K3[2]' -> AObject."""
    m = _OBJ.match(text)
    if not m:
        raise ValueError(f"cannot parse object {text!r}; expected L<j> or K<j>[shift]")
    fam = Family.F1 if m.group(1) == "L" else Family.F2
    return AObject(fam, int(m.group(2)), int(m.group(3) or 0))


@dataclass(frozen=True)
class Generator:
    base: lg_base.BasePoint
    slopes: tuple  # fiber slopes over this base point
    residue: tuple
    degree: int
    label: str


@dataclass
class GradedHom:
    source: AObject
    target: AObject
    generators: list
    differential: np.ndarray = None
    diff_degrees: tuple = None  # (source degree, target degree) of the differential
    truncation: int = None
    cohomology_dims: dict = field(default_factory=dict)

    def block(self, degree):
        return [n for n, g in enumerate(self.generators) if g.degree == degree]

    def dims(self):
        out = {}
        for g in self.generators:
            out[g.degree] = out.get(g.degree, 0) + 1
        return dict(sorted(out.items()))


def _fiber_block(base_pt, i, j, base_deg, tag):
    fd = fiber_degree(i, j)
    return [Generator(base_pt, (i, j), fp.residue, base_deg + fd, f"{tag}:{fp.residue}")
            for fp in fiber_intersections(i, j)]


def _wrap_steps(N, cfg):
    return max(1, math.ceil(N / cfg.wraps_per_step))


def hom_complex(A, B, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL, C=1.0,
                base_config=lg_base.DEFAULT_CONFIG):
    """Floer complex from A to B at wrapping truncation N.

    C is the overall scalar of the differential; it is an unknown nonzero
    constant and nothing computed downstream depends on it.
    """
    if N < 0:
        raise RangeError("truncation N must be nonnegative")
    if C == 0:
        raise ValueError("the differential scalar must be nonzero")
    p = p or make_modular_param(0.2)
    i, j = A.index, B.index
    d = j - i
    cfg = base_config
    fams = (A.family, B.family)
    gens, diff, diff_deg, trunc = [], None, None, None

    if fams == (Family.F2, Family.F1):
        # the ray stays above every U end however far it is wrapped
        pts = lg_base.base_intersections(lg_base.wrap(lg_base.ray(i, cfg), _wrap_steps(N, cfg)),
                                         lg_base.u_shape(j, cfg))
        assert not pts
    elif Family.F1 == A.family:
        if d < 2:
            raise RangeError(f"Hom({A}, {B}) needs index gap >= 2, got {d}")
        target = lg_base.u_shape(j, cfg) if B.family is Family.F1 else lg_base.ray(j, cfg)
        k, src = lg_base.wrap_until_separated(lg_base.u_shape(i, cfg), target)
        pts = lg_base.base_intersections(src, target)
        # stabilized: one more wrap adds nothing
        more = lg_base.base_intersections(lg_base.wrap(src, 1), target)
        assert [q.location for q in more] == [q.location for q in pts]
        regrade = lg_base.REGRADE_F1 if B.family is Family.F1 else 0
        slopes = {"left": i, "right": lg_base.monodromy_slope(i)}
        for pt in pts:
            deg = lg_base.base_degree(pt) + regrade
            gens += _fiber_block(pt, slopes[pt.location], j, deg, pt.location)
        lo, hi = sorted({g.degree for g in gens})
        diff = C * mult_by_theta_matrix(p, d - 1, R, tol)
        diff_deg = (lo, hi)
    else:
        if d < 1:
            raise RangeError(f"Hom({A}, {B}) needs index gap >= 1, got {d}")
        pts = lg_base.base_intersections(lg_base.wrap(lg_base.ray(i, cfg), _wrap_steps(N, cfg)),
                                         lg_base.ray(j, cfg))
        pts = [q for q in pts if q.loop_class <= N]
        assert len(pts) == N + 1
        for pt in pts:
            gens += _fiber_block(pt, i, j, lg_base.base_degree(pt), f"x^{pt.loop_class}")
        trunc = N

    move = B.shift - A.shift
    if move:
        gens = [Generator(g.base, g.slopes, g.residue, g.degree - move, g.label) for g in gens]
        if diff_deg:
            diff_deg = (diff_deg[0] - move, diff_deg[1] - move)
    h = GradedHom(A, B, gens, diff, diff_deg, trunc)
    h.cohomology_dims = cohomology(h, tol)
    return h


def cohomology(h, tol=DEFAULT_TOL):
    """Degree -> dimension of the cohomology of h."""
    dims = h.dims()
    if h.differential is None:
        return dims
    src, tgt = h.diff_degrees
    r = svd_rank(h.differential, tol)
    dims[src] -= r
    dims[tgt] -= r
    return dims


def cohomology_basis(h, tol=DEFAULT_TOL):
    """Generator indices whose classes form the distinguished basis of the
    cohomology in the degree that carries products."""
    if h.differential is None:
        return list(range(len(h.generators)))
    blk = h.block(h.diff_degrees[1])
    return [blk[c] for c in lex_cokernel_basis(h.differential, len(blk))]


def class_coordinates(h, basis, vectors):
    """Coordinates in the chosen basis of the cohomology classes of chain
    vectors (rows), solving v = E_S a + D b."""
    vectors = np.atleast_2d(vectors)
    if h.differential is None:
        return vectors[:, basis]
    blk = h.block(h.diff_degrees[1])
    pos = [blk.index(b) for b in basis]
    E = np.zeros((len(blk), len(pos)), dtype=complex)
    E[pos, range(len(pos))] = 1.0
    aug = np.hstack([E, h.differential])
    sol, *_ = np.linalg.lstsq(aug, vectors.T, rcond=None)
    return sol[: len(pos)].T


_SHAPES = {
    (Family.F1, Family.F1, Family.F2): "LLK",
    (Family.F1, Family.F2, Family.F2): "LKK",
    (Family.F2, Family.F2, Family.F2): "KKK",
}


def _active_block(h):
    """Indices of the generators that carry the product (degree of the
    differential's target, or everything when there is no differential)."""
    if h.differential is None:
        return list(range(len(h.generators)))
    return h.block(h.diff_degrees[1])


def _shape(A, B, Cobj):
    shape = _SHAPES.get((A.family, B.family, Cobj.family))
    if shape is None:
        raise ShapeError(f"unsupported composition shape ({A}, {B}, {Cobj})")
    return shape


def chain_product(A, B, Cobj, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL, calibration=None):
    """Chain-level product on the active blocks, from fiber triangles.

    Returns (tensor, overflow) where overflow counts x-degree products that
    exceed the truncation and were dropped.
    """
    shape = _shape(A, B, Cobj)
    p = p or make_modular_param(0.2)
    a, b, c = A.index, B.index, Cobj.index
    need = {"LLK": (2, 2), "LKK": (2, 1), "KKK": (1, 1)}[shape]
    if b - a < need[0] or c - b < need[1]:
        raise RangeError(f"index gaps of ({A}, {B}, {Cobj}) are outside the supported range")
    kappa = calibrate(p.t, R, tol) if calibration is None else calibration
    T = fiber_triangle_constants(a, b, c, R, tol, calibration=kappa).data
    n1, n2, n3 = T.shape
    overflow = 0
    if shape == "LLK":
        return T, overflow
    if shape == "LKK":
        # x^m with m >= 1 from the ray-ray factor has no partner over the U end
        out = np.zeros((n1, n2 * (N + 1), n3), dtype=complex)
        out[:, :n2, :] = T
        return out, overflow
    out = np.zeros((n1 * (N + 1), n2 * (N + 1), n3 * (N + 1)), dtype=complex)
    for x in range(N + 1):
        for y in range(N + 1):
            if x + y > N:
                overflow += 1
                continue
            out[x * n1:(x + 1) * n1, y * n2:(y + 1) * n2, (x + y) * n3:(x + y + 1) * n3] = T
    return out, overflow


def product(A, B, Cobj, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL, calibration=None, C=1.0):
    """Composition HF(B, Cobj) x HF(A, B) -> HF(A, Cobj) on cohomology.

    Indexed [first input, second input, output] in the distinguished
    cohomology bases of the three spaces.
    """
    p = p or make_modular_param(0.2)
    chain, overflow = chain_product(A, B, Cobj, N, p, R, tol, calibration)
    h1 = hom_complex(A, B, N, p, R, tol, C)
    h2 = hom_complex(B, Cobj, N, p, R, tol, C)
    h3 = hom_complex(A, Cobj, N, p, R, tol, C)
    act1, act2 = _active_block(h1), _active_block(h2)
    S1, S2, S3 = (cohomology_basis(h, tol) for h in (h1, h2, h3))
    rows1 = [act1.index(s) for s in S1]
    rows2 = [act2.index(s) for s in S2]
    sub = chain[np.ix_(rows1, rows2, range(chain.shape[2]))]
    flat = sub.reshape(-1, sub.shape[2])
    coords = class_coordinates(h3, S3, flat)
    data = coords.reshape(len(S1), len(S2), len(S3))
    labels = [[h.generators[s].label for s in S] for h, S in ((h1, S1), (h2, S2), (h3, S3))]
    return StructureTensor(data, 0.0, 0.0, {
        "shape": _shape(A, B, Cobj), "objects": (str(A), str(B), str(Cobj)),
        "labels": labels, "overflow": overflow})


def leibniz_defect(A, B, Cobj, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL, calibration=None, C=1.0):
    """Largest relative distance from im(d) of a product with a d-image.

    Zero (to rounding) means the chain product descends to cohomology.
    """
    p = p or make_modular_param(0.2)
    chain, _ = chain_product(A, B, Cobj, N, p, R, tol, calibration)
    h1 = hom_complex(A, B, N, p, R, tol, C)
    h2 = hom_complex(B, Cobj, N, p, R, tol, C)
    h3 = hom_complex(A, Cobj, N, p, R, tol, C)
    if h3.differential is None:
        return 0.0
    q, _ = np.linalg.qr(h3.differential)
    worst = 0.0
    images = []
    if h1.differential is not None:
        images.append(np.einsum("pi,pqr->iqr", h1.differential, chain).reshape(-1, chain.shape[2]))
    if h2.differential is not None:
        d2 = h2.differential
        images.append(np.einsum("qi,pqr->pir", d2, chain[:, : d2.shape[0], :]).reshape(-1, chain.shape[2]))
    for V in images:
        for v in V:
            nv = np.linalg.norm(v)
            if nv > 0:
                worst = max(worst, np.linalg.norm(v - q @ (q.conj().T @ v)) / nv)
    return float(worst)
