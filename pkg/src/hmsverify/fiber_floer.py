"""Linear Lagrangians in the fiber T^4 = (R^2 / QZ^2) x (R^2 / Z^2).

The slope-k Lagrangian is theta = -k Q^{-1} xi. Its lifts to R^4 are the
planes theta = -k Q^{-1} xi + nu with nu in Z^2. Two lifts of slopes i < j
meet at xi = Q (nu_j - nu_i) / (j - i), and the residue of that point is
(nu_j - nu_i) mod (j - i).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import itertools
import math

import numpy as np

from ._linalg import shell_tail
from .errors import ConvergenceError, DomainError, TransversalityError
from .lg_base import short_path_degree
from .lattice_theta import DEFAULT_R, DEFAULT_TOL, StructureTensor, characteristics, mult_structure_constants

Q = np.array([[2, 1], [1, 2]])
QINV = np.array([[2, -1], [-1, 2]]) / 3.0


@dataclass(frozen=True)
class LinearLagrangian:
    slope: int

    def lift(self, nu):
        """Affine plane (xi -> theta) for the lift labelled nu."""
        k = self.slope
        nu = np.asarray(nu, dtype=float)
        return lambda xi: -k * (QINV @ xi) + nu


@dataclass(frozen=True)
class FiberPoint:
    residue: tuple
    xi: tuple
    theta: tuple


def fiber_intersections(i, j):
    """The |j-i|^2 points of l_i ∩ l_j, ordered by residue."""
    if i == j:
        raise TransversalityError(f"slopes {i} and {j} are not transverse")
    d = abs(j - i)
    lo = min(i, j)
    pts = []
    for a in characteristics(d):
        # exact coordinates; xi = Q a / d, theta = -lo a / d mod 1
        xi = tuple(Fraction(int(v), d) for v in Q @ np.array(a))
        th = tuple((Fraction(-lo * av, d)) % 1 for av in a)
        pts.append(FiberPoint(a, xi, th))
    return pts


def grading_angle(k):
    """Direction of slope k in turns; the Lagrangian grading is twice this."""
    return math.atan(k) / (2 * math.pi)


def fiber_degree(i, j, point=None):
    """Fiber degree of a generator of CF(l_i, l_j), summed over both planes.

    Linear Lagrangians meet at constant angles, so the degree does not
    depend on the point; the argument is accepted for symmetry with the base.
    """
    if i == j:
        raise TransversalityError(f"slopes {i} and {j} are not transverse")
    # output line first, as for base points
    per_plane = short_path_degree(grading_angle(j), grading_angle(i))
    return 2 * per_plane


def _vertex(si, nui, sj, nuj):
    """Corner of two lifts; nus may carry a leading batch axis."""
    xi = (np.asarray(nuj) - np.asarray(nui)) @ Q.T / (sj - si)
    theta = -si * xi @ QINV.T + np.asarray(nui)
    return xi, theta


def triangle_area(slopes, nus):
    """Symplectic area (for d xi ∧ d theta) of the flat triangle cut out by
    three lifts in R^4, with vertices ordered p in l_i∩l_j, q in l_j∩l_k,
    r in l_i∩l_k."""
    (si, sj, sk), (ni, nj, nk) = slopes, nus
    p = _vertex(si, ni, sj, nj)
    q = _vertex(sj, nj, sk, nk)
    r = _vertex(si, ni, sk, nk)
    u = (q[0] - p[0], q[1] - p[1])
    v = (r[0] - p[0], r[1] - p[1])
    return 0.5 * (np.sum(u[0] * v[1], axis=-1) - np.sum(u[1] * v[0], axis=-1))


def natural_calibration(t):
    """Scale that turns e^{-2 pi kappa Area} into powers of t."""
    return -math.log(t) / (2 * math.pi)


def _triangle_terms(i, j, k, p_res, q_res, r_res, R, shift):
    d1, d2 = j - i, k - j
    w = np.array(list(itertools.product(range(-R, R + 1), repeat=2)))
    nu_i = np.asarray(shift)
    nu_k = nu_i + np.asarray(r_res)
    nu_j = nu_i + np.asarray(p_res) + d1 * w
    keep = ~np.any((nu_k - nu_j - np.asarray(q_res)) % d2, axis=1)
    nu_j = nu_j[keep]
    ones = np.ones_like(nu_j)
    return triangle_area((i, j, k), (ones * nu_i, nu_j, ones * nu_k))


@lru_cache(maxsize=64)
def _area_table(i, j, k, R, shift):
    d1, d2, d3 = j - i, k - j, k - i
    P, Qs, Rs = characteristics(d1), characteristics(d2), characteristics(d3)
    table = {}
    for a, p_res in enumerate(P):
        for b, q_res in enumerate(Qs):
            for c, r_res in enumerate(Rs):
                table[a, b, c] = _triangle_terms(i, j, k, p_res, q_res, r_res, R, shift)
    return (len(P), len(Qs), len(Rs)), table


def _tail_bound(d1, d2, d3, R, kappa):
    # area = u.Qu / (2 d1 d2 d3) with u = d3 nu_j - d1 nu_k (taking nu_i = 0);
    # nu_j = p + d1 w, so |u| >= d1 d3 |w| - C with C from the residues
    lin = d3 * math.sqrt(2) * d1 + d1 * math.sqrt(2) * d3
    a = 2 * math.pi * kappa * (d1 * d3) ** 2 / (2 * d1 * d2 * d3)
    b = 2 * math.pi * kappa * 2 * lin * d1 * d3 / (2 * d1 * d2 * d3)
    return shell_tail(a, b, R + 1)


def fiber_triangle_constants(i, j, k, R=DEFAULT_R, tol=DEFAULT_TOL, calibration=None,
                             t=None, shift=(0, 0)):
    """Area-weighted counts of flat triangles between l_i, l_j, l_k.

    T[p, q, r] = sum over triangles with corners at the residues p, q, r of
    exp(-2 pi kappa Area). kappa is the fiber symplectic calibration; pass it
    explicitly or give t to use the natural value. ``shift`` moves all three
    Lagrangians by a common lattice vector.
    """
    if not i < j < k:
        raise DomainError(f"slopes must increase strictly, got {(i, j, k)}")
    if calibration is None:
        if t is None:
            raise DomainError("need a calibration constant or a modular parameter")
        calibration = natural_calibration(t)
    kappa = float(calibration)
    if kappa <= 0:
        raise DomainError("fiber calibration must be positive")
    shape, table = _area_table(i, j, k, int(R), tuple(int(s) for s in shift))
    data = np.zeros(shape, dtype=complex)
    for key, areas in table.items():
        if areas.size:
            data[key] = np.exp(-2 * np.pi * kappa * areas).sum()
    tail = _tail_bound(j - i, k - j, k - i, R, kappa)
    if not tail <= tol:
        raise ConvergenceError(f"triangle tail bound {tail:.3e} exceeds tol {tol:.1e}")
    return StructureTensor(data, 0.0, tail, {"slopes": (i, j, k), "calibration": kappa})


def _log_ratio_spread(kappa, target, R):
    kappa = float(np.ravel(kappa)[0])
    T = fiber_triangle_constants(0, 1, 2, R, math.inf, calibration=kappa).data[0, 0].real
    r = np.log(T) - np.log(target)
    return r - r.mean()


@lru_cache(maxsize=None)
def calibrate(t, R=DEFAULT_R, tol=DEFAULT_TOL):
    """Fit the fiber calibration on the (0, 1, 2) triangle tensor.

    Chooses kappa so that the triangle tensor matches the theta product
    tensor of two level-1 thetas up to one overall scalar. The fit is done
    once and reused for every other triple.
    """
    from scipy.optimize import least_squares

    from .lattice_theta import make_modular_param

    target = mult_structure_constants(make_modular_param(t), 1, 1, R, tol).data[0, 0].real
    x0 = natural_calibration(t)
    sol = least_squares(_log_ratio_spread, x0=[x0 * 1.05], args=(target, R),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return float(sol.x[0])
