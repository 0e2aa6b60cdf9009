"""Level-k theta functions on the abelian surface with polarization Q.

The level-k theta with characteristic c in (Z/k)^2 is

    theta_c(x) = sum_{n = c mod k} t^{n.Qn / 2k} x1^{n1} x2^{n2},

i.e. the sum over v = m + c/k of t^{k v.Qv/2} x^{k v}. All sums run over a
finite window |v|_inf <= R in lexicographic order, so repeated calls are
bitwise reproducible.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import math

import numpy as np
from scipy.stats import qmc

from ._linalg import shell_tail, svd_rank
from .errors import ConvergenceError, DomainError, RankError

Q = np.array([[2, 1], [1, 2]])
DEFAULT_R = 12
DEFAULT_TOL = 1e-9
# largest discarded-tail bound accepted by theta_eval
MAX_TAIL = 0.1
GRAMIAN_COND_LIMIT = 1e8


def qform(n):
    n1, n2 = n
    return 2 * n1 * n1 + 2 * n1 * n2 + 2 * n2 * n2


@dataclass(frozen=True)
class ModularParam:
    t: float

    @property
    def Q(self):
        return Q.copy()

    @property
    def log_t(self):
        return math.log(self.t)

    def weight(self, n):
        """t^{n.Qn/2}."""
        return self.t ** (qform(n) / 2)


def make_modular_param(t):
    t = float(t)
    if not (0.0 < t < 1.0):
        raise DomainError(f"modular parameter t={t} must lie in (0, 1)")
    return ModularParam(t)


def characteristics(k):
    """(Z/k)^2 in lexicographic order."""
    return [(a, b) for a in range(k) for b in range(k)]


@dataclass(frozen=True)
class ThetaBasis:
    level: int
    characteristics: tuple
    truncation_radius: int


def theta_basis(k, R=DEFAULT_R):
    if k < 1:
        raise DomainError("theta basis level must be positive")
    if R < 1:
        raise DomainError("truncation radius must be positive")
    return ThetaBasis(k, tuple(characteristics(k)), R)


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    abs_error_bound: float


@dataclass
class StructureTensor:
    """A[c1, c2, c3]: coefficient of the c3 output basis element in the
    product of the c1 and c2 input elements."""

    data: np.ndarray
    residual: float = 0.0
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.data.shape


@lru_cache(maxsize=None)
def _exponents(k, c, R):
    """Lattice points n = c mod k with |n|_inf <= kR, lex order, and n.Qn/2k."""
    lo = [-((k * R + ca) // k) for ca in c]
    hi = [(k * R - ca) // k for ca in c]
    ms = itertools.product(range(lo[0], hi[0] + 1), range(lo[1], hi[1] + 1))
    n = np.array([(k * m1 + c[0], k * m2 + c[1]) for m1, m2 in ms], dtype=float)
    q = (2 * n[:, 0] ** 2 + 2 * n[:, 0] * n[:, 1] + 2 * n[:, 1] ** 2) / (2 * k)
    n.setflags(write=False)
    q.setflags(write=False)
    return n, q


def _tail(p, k, R, logabs):
    """Tail bound for the terms with |n|_inf > kR at points with log|x| = logabs."""
    b = float(np.max(np.abs(logabs).sum(axis=-1))) if np.size(logabs) else 0.0
    return shell_tail(-p.log_t / (2 * k), b, k * R + 1)


def _check_points(x):
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if x.shape[-1] != 2:
        raise ValueError("points must be pairs (x1, x2)")
    if np.any(x == 0):
        raise DomainError("theta is evaluated at nonzero points only")
    return x


def basis_values(p, k, points, R=DEFAULT_R, max_tail=MAX_TAIL):
    """Matrix of theta_c(x) for every point (rows) and characteristic (columns).

    Returns (values, tail_bound) where tail_bound bounds every entry's error.
    """
    x = _check_points(points)
    logx = np.log(x)
    tail = _tail(p, k, R, logx.real)
    if not tail <= max_tail:
        raise ConvergenceError(
            f"tail bound {tail:.3e} exceeds ceiling {max_tail:.3e} at level {k}, R={R}")
    out = np.empty((x.shape[0], k * k), dtype=complex)
    for j, c in enumerate(characteristics(k)):
        n, q = _exponents(k, c, R)
        ex = p.log_t * q[None, :] + logx @ n.T
        out[:, j] = np.exp(ex).sum(axis=1)
    return out, tail


def theta_eval(p, k, c, x, R=DEFAULT_R, max_tail=MAX_TAIL):
    """Level-k theta with characteristic c at the point x = (x1, x2)."""
    if R < 1:
        raise DomainError("truncation radius must be positive")
    c = (int(c[0]) % k, int(c[1]) % k)
    xx = _check_points([x])
    logx = np.log(xx)
    tail = _tail(p, k, R, logx.real)
    if not tail <= max_tail:
        raise ConvergenceError(
            f"tail bound {tail:.3e} exceeds ceiling {max_tail:.3e} at level {k}, R={R}")
    n, q = _exponents(k, c, R)
    val = np.exp(p.log_t * q + (logx @ n.T)[0]).sum()
    return ThetaValue(complex(val), tail)


def translate(p, x, m):
    """x -> x * t^{Qm}, the action of the lattice vector m."""
    qm = Q @ np.asarray(m)
    return (x[0] * p.t ** float(qm[0]), x[1] * p.t ** float(qm[1]))


def cocycle(p, x, m):
    """Level-1 factor t^{-m.Qm/2} x^{-m}."""
    return p.t ** (-qform(m) / 2) * x[0] ** (-int(m[0])) * x[1] ** (-int(m[1]))


def quasi_periodicity_residual(p, k, c, x, R=DEFAULT_R, m=(1, 0), floor=1e-300):
    """|theta(translate(x)) - cocycle(x)^k theta(x)| / max(|theta(x)|, floor).

    Uses the k-th power of the level-1 cocycle; the residual is at tail
    scale when that is the correct transformation law.
    """
    base = theta_eval(p, k, c, x, R).value
    moved = theta_eval(p, k, c, translate(p, x, m), R).value
    return abs(moved - cocycle(p, x, m) ** k * base) / max(abs(base), floor)


def sample_points(n, seed=0):
    """n quasi-random points on the torus |x1| = |x2| = 1."""
    u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    return np.exp(2j * np.pi * u)


def _good_points(p, K, npts, R, seed, tries=8):
    for attempt in range(tries):
        pts = sample_points(npts, seed=seed + attempt)
        B, tail = basis_values(p, K, pts, R)
        if np.linalg.cond(B.conj().T @ B) <= GRAMIAN_COND_LIMIT:
            return pts, B, tail
    raise RankError(f"no well-conditioned sample set for level {K} after {tries} draws")


def mult_structure_constants(p, k1, k2, R=DEFAULT_R, tol=DEFAULT_TOL, seed=0):
    """Coefficients of theta^{(k1)}_{c1} theta^{(k2)}_{c2} in the level k1+k2 basis.

    Fitted by least squares at 2 (k1+k2)^2 quasi-random points of the unit
    torus. Level 0 means the constant function 1. The returned array is
    read-only and shared between calls with equal arguments.
    """
    return _structure_constants(p, int(k1), int(k2), int(R), float(tol), int(seed))


@lru_cache(maxsize=256)
def _structure_constants(p, k1, k2, R, tol, seed):
    if k1 < 0 or k2 < 0:
        raise DomainError("levels must be nonnegative")
    if k1 == 0 or k2 == 0:
        k = k1 + k2
        size = k * k if k else 1
        eye = np.eye(size, dtype=complex)
        data = eye[None, :, :] if k1 == 0 else eye[:, None, :]
        data.setflags(write=False)
        return StructureTensor(data, 0.0, 0.0, {"levels": (k1, k2)})
    K = k1 + k2
    pts, B, tail = _good_points(p, K, max(2 * K * K, 8), R, seed)
    if svd_rank(B, tol, check_gap=False) < K * K:
        raise RankError(f"level-{K} basis is numerically rank deficient at the sample points")
    V1, t1 = basis_values(p, k1, pts, R)
    V2, t2 = basis_values(p, k2, pts, R)
    P = (V1[:, :, None] * V2[:, None, :]).reshape(len(pts), -1)
    A, *_ = np.linalg.lstsq(B, P, rcond=None)
    resid = float(np.max(np.abs(B @ A - P)) / np.max(np.abs(P)))
    if not resid < tol:
        raise ConvergenceError(f"structure-constant fit residual {resid:.3e} >= tol {tol:.1e}")
    data = A.T.reshape(k1 * k1, k2 * k2, K * K)
    data.setflags(write=False)
    return StructureTensor(data, resid, max(tail, t1, t2), {"levels": (k1, k2)})


def structure_residual(p, tensor, k1, k2, points, R=DEFAULT_R):
    """Max relative error of the tensor's prediction at the given points."""
    K = k1 + k2
    B, _ = basis_values(p, K, points, R)
    V1, _ = basis_values(p, k1, points, R)
    V2, _ = basis_values(p, k2, points, R)
    P = V1[:, :, None] * V2[:, None, :]
    pred = np.einsum("abc,pc->pab", tensor.data, B)
    return float(np.max(np.abs(pred - P)) / np.max(np.abs(P)))


def mult_by_theta_matrix(p, m, R=DEFAULT_R, tol=DEFAULT_TOL, seed=0):
    """Matrix of theta^{(m)}_c -> theta * theta^{(m)}_c in the level m+1 basis.

    Shape ((m+1)^2, m^2); columns follow the level-m characteristics.
    """
    if m < 1:
        raise DomainError("multiplication-by-theta needs m >= 1")
    return mult_structure_constants(p, 1, m, R, tol, seed).data[0].T.copy()
